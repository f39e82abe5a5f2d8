//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! `cargo test -p pipecrawler --test acceptance`

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use pipecrawler::{parallel_sweep, parse_scenario, parse_scenario_str, ScenarioError, ScenarioFile};
use pipecrawler_core::differential::{
    internal_state, power_balance, solve_torque_balance, LinearSlipLoad, LoadCurve, MonotoneFn, SolverOptions,
    TransmissionConfig, TransmissionState,
};
use pipecrawler_core::simulator::{run, RunOutput, Scenario, SimError};
use pipecrawler_core::traction::{sprocket_torque, traction_force, tractive_effort};
use pipecrawler_core::{PipeNetwork, RobotError, RobotParams, SegmentSpec, StartPose};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn scenario_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within_time(start: Instant, limit: Duration) -> Result<Duration, String> {
    let took = start.elapsed();
    check(took < limit, || format!("took {took:.2?}, limit {limit:?}"))?;
    Ok(took)
}

fn rel(a: f64, b: f64, scale: f64) -> f64 {
    (a - b).abs() / scale.max(f64::MIN_POSITIVE)
}

struct LoadCase {
    config: TransmissionConfig,
    input_speed: f64,
    linear: Option<[LinearSlipLoad; 3]>,
    cubic: [(f64, f64, f64); 3],
}

fn random_cases(n: usize) -> Vec<LoadCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    (0..n)
        .map(|i| {
            let config = TransmissionConfig::lossless(rng.gen_range(0.1..5.0), rng.gen_range(0.1..5.0)).unwrap();
            let input_speed = rng.gen_range(-20.0..20.0);
            let linear = (i % 2 == 0).then(|| {
                [0; 3].map(|_| {
                    LinearSlipLoad::with_offset(
                        rng.gen_range(0.01..100.0),
                        rng.gen_range(5.0..40.0),
                        rng.gen_range(-100.0..100.0),
                        rng.gen_range(-5.0..5.0),
                    )
                    .unwrap()
                })
            });
            let cubic = [0; 3].map(|_| (rng.gen_range(0.1..5.0), rng.gen_range(0.0..0.5), rng.gen_range(-3.0..3.0)));
            LoadCase { config, input_speed, linear, cubic }
        })
        .collect()
}

struct Worst {
    mean: f64,
    torque: f64,
    power: f64,
}

fn balance_sweep() -> Result<Worst, String> {
    let mut worst = Worst { mean: 0.0, torque: 0.0, power: 0.0 };
    let opts = SolverOptions::default();
    for (i, case) in random_cases(1000).iter().enumerate() {
        let cubic = case.cubic.map(|(a, b, d)| MonotoneFn::new(move |x: f64| a * x + b * x * x * x + d, 10.0));
        let loads: [&dyn LoadCurve; 3] = match &case.linear {
            Some(l) => [&l[0], &l[1], &l[2]],
            None => [&cubic[0], &cubic[1], &cubic[2]],
        };
        let bal = solve_torque_balance(case.input_speed, &loads, &case.config, &opts)
            .map_err(|e| format!("case {i}: {e}"))?;
        let target = case.config.mean_output_speed(case.input_speed);
        let speed_scale = bal.output_speeds.iter().fold(target.abs(), |m, x| m.max(x.abs()));
        worst.mean = worst.mean.max(rel(bal.mean_speed(), target, speed_scale));

        let torques = [0, 1, 2].map(|j| loads[j].torque(bal.output_speeds[j]));
        let torque_scale = torques.iter().fold(bal.common_torque.abs(), |m, t| m.max(t.abs())).max(1e-3);
        for t in torques {
            worst.torque = worst.torque.max(rel(t, bal.common_torque, torque_scale));
        }

        let state = TransmissionState::from_balance(&case.config, case.input_speed, &bal, 1e-9)
            .map_err(|e| format!("case {i}: {e}"))?;
        let flow = state.input_power().abs().max(bal.output_speeds.iter().map(|w| (w * bal.common_torque).abs()).sum());
        worst.power = worst.power.max(power_balance(&state, &case.config).abs() / flow.max(1e-12));
    }
    Ok(worst)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let worst = balance_sweep()?;
    let took = within_time(start, Duration::from_secs(5))?;
    check(worst.mean < 1e-9, || format!("worst mean-speed error {:.2e}", worst.mean))?;
    Ok(format!("1000 load triples, worst relative mean error {:.2e}, {took:.2?}", worst.mean))
}

fn criterion_2() -> Outcome {
    let worst = balance_sweep()?;
    check(worst.torque < 1e-9, || format!("worst torque spread {:.2e}", worst.torque))?;
    check(worst.power < 1e-9, || format!("worst power residual {:.2e}", worst.power))?;
    Ok(format!("worst torque spread {:.2e}, worst power residual {:.2e}", worst.torque, worst.power))
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0003);
    let mut worst: f64 = 0.0;
    for _ in 0..500 {
        let config = TransmissionConfig::lossless(rng.gen_range(0.1..5.0), rng.gen_range(0.1..5.0)).unwrap();
        let w = rng.gen_range(-20.0..20.0);
        let r_s: f64 = rng.gen_range(5.0..40.0);
        let c = 10f64.powf(rng.gen_range(-2.0..5.0));
        let v_req = [0; 3].map(|_| rng.gen_range(-100.0..100.0));
        let loads = v_req.map(|v| LinearSlipLoad::new(c, r_s, v).unwrap());
        let bal = solve_torque_balance(w, &loads, &config, &SolverOptions::default()).map_err(|e| e.to_string())?;
        let delta = config.overall_ratio() * w * r_s - v_req.iter().sum::<f64>() / 3.0;
        for (got, v) in bal.output_speeds.iter().zip(v_req) {
            let expected = v / r_s + delta / r_s;
            worst = worst.max(rel(*got, expected, expected.abs().max(1.0)));
        }
    }
    let took = within_time(start, Duration::from_secs(1))?;
    check(worst < 1e-9, || format!("worst deviation {worst:.2e}"))?;
    Ok(format!("500 linear cases, worst deviation {worst:.2e}, {took:.2?}"))
}

/// Least-squares minimum-norm solve of the side-gear constraints by SVD.
fn side_gear_oracle(outputs: &[f64; 3], w: f64, g1: f64, g2: f64) -> DVector<f64> {
    let mut a = DMatrix::zeros(6, 6);
    let mut b = DVector::zeros(6);
    for i in 0..3 {
        a[(i, 2 * i)] = 1.0;
        a[(i, 2 * i + 1)] = 1.0;
        b[i] = 2.0 * g1 * w;
        a[(3 + i, 2 * i + 1)] = 1.0;
        a[(3 + i, (2 * i + 2) % 6)] = 1.0;
        b[3 + i] = 2.0 * outputs[i] / g2;
    }
    a.svd(true, true).solve(&b, 1e-12).unwrap()
}

fn criterion_4() -> Outcome {
    let frozen = [22.0 / 3.0, 38.0 / 3.0, 34.0 / 3.0, 26.0 / 3.0, 34.0 / 3.0, 26.0 / 3.0];
    let config = TransmissionConfig::lossless(1.0, 1.0).unwrap();
    let side = internal_state(&[12.0, 10.0, 8.0], 10.0, &config, 1e-12).map_err(|e| e.to_string())?;
    let oracle = side_gear_oracle(&[12.0, 10.0, 8.0], 10.0, 1.0, 1.0);
    let mut worst: f64 = 0.0;
    for k in 0..6 {
        check((oracle[k] - frozen[k]).abs() < 1e-12, || format!("oracle component {k} = {}", oracle[k]))?;
        worst = worst.max((side[k] - frozen[k]).abs());
    }
    check(worst < 1e-9, || format!("internal_state off by {worst:.2e}: {side:?}"))?;
    Ok(format!("matches frozen values and SVD oracle, max error {worst:.2e}"))
}

fn elbow_records(out: &RunOutput, sc: &Scenario) -> Vec<[f64; 3]> {
    out.records.iter().filter(|r| sc.network.segments()[r.segment_index].is_bend()).map(|r| r.track_speeds).collect()
}

fn criterion_5() -> Outcome {
    let sc = parse_scenario(scenario_path("elbow.json")).map_err(|e| e.to_string())?;
    check(sc.robot.contact_radius_mm == 50.0 && sc.robot.orientation_deg == 0.0, || "unexpected scenario".into())?;
    let hand = straight_elbow_network();
    for s in [0.0, 150.0, 300.0, 400.0, 771.0] {
        let (a, b) = (sc.network.pose_at(s).map_err(|e| e.to_string())?, hand.pose_at(s).map_err(|e| e.to_string())?);
        check((a.position - b.position).norm() < 1e-9, || format!("elbow geometry differs at s = {s}"))?;
    }
    let out = run(&sc).map_err(|e| e.to_string())?;
    let v = sc.centerline_speed();
    let ratio = [350.0, 275.0, 275.0].map(|x| x / 300.0);
    let speeds = elbow_records(&out, &sc);
    check(!speeds.is_empty(), || "no records in the bend".into())?;
    let (mut worst_ratio, mut worst_mean): (f64, f64) = (0.0, 0.0);
    for s in &speeds {
        for j in 0..3 {
            worst_ratio = worst_ratio.max(rel(s[j] / v, ratio[j], ratio[j]));
        }
        worst_mean = worst_mean.max(rel(s.iter().sum::<f64>() / 3.0, v, v));
    }
    check(worst_ratio < 1e-3, || format!("speed ratio off by {:.3}%", worst_ratio * 100.0))?;
    check(worst_mean < 1e-6, || format!("mean speed off by {worst_mean:.2e}"))?;
    Ok(format!("{} bend samples, ratio error {:.2e}%, mean error {worst_mean:.2e}", speeds.len(), worst_ratio * 100.0))
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let base = parse_scenario(scenario_path("four_section.json")).map_err(|e| e.to_string())?;
    check(base.dt == 0.01, || "scenario dt is not 0.01 s".into())?;
    let mut slips = Vec::new();
    for factor in [1.0, 10.0, 100.0] {
        let sc = Scenario { slip_stiffness: base.slip_stiffness * factor, ..base.clone() };
        let out = run(&sc).map_err(|e| e.to_string())?;
        check(out.summary.finish_time.is_some(), || "run did not finish".into())?;
        slips.push(out.summary.max_abs_slip);
    }
    let took = within_time(start, Duration::from_secs(10))?;
    check(slips[0] < 1e-6, || format!("max |slip| {:.2e} mm/s at default stiffness", slips[0]))?;
    check(slips.windows(2).all(|w| w[1] < w[0]), || format!("slip not decreasing: {slips:?}"))?;
    Ok(format!("max |slip| {:.2e} / {:.2e} / {:.2e} mm/s, {took:.2?}", slips[0], slips[1], slips[2]))
}

fn criterion_7() -> Outcome {
    let sc = parse_scenario(scenario_path("four_section.json")).map_err(|e| e.to_string())?;
    let out = run(&sc).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    let mut bends = 0;
    for seg in out.summary.segments.iter().filter(|s| s.is_bend) {
        let ape = seg.ape_percent.ok_or_else(|| format!("bend {} has no samples", seg.index))?;
        worst = ape.iter().fold(worst, |m, a| m.max(*a));
        bends += 1;
    }
    check(bends == 2, || format!("expected 2 bends, saw {bends}"))?;
    check(worst <= 2.5, || format!("APE {worst:.3}% above 2.5%"))?;
    check(worst <= 0.1, || format!("APE {worst:.3}% above 0.1%"))?;
    Ok(format!("worst per-track APE {worst:.2e}% over {bends} bends"))
}

fn criterion_8() -> Outcome {
    let sc = parse_scenario(scenario_path("four_section.json")).map_err(|e| e.to_string())?;
    let thetas = [0.0, 30.0, 60.0, 90.0, 120.0];
    let runs = parallel_sweep(&sc, &thetas).map_err(|e| e.to_string())?;
    let mut times = Vec::new();
    for r in &runs {
        let out = r.outcome.as_ref().map_err(|e| format!("θ={}: {e}", r.orientation_deg))?;
        times.push(out.summary.finish_time.ok_or("run did not finish")?);
    }
    let (lo, hi) = times.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), t| (a.min(*t), b.max(*t)));
    let spread = (hi - lo) / lo;
    check(spread < 5e-3, || format!("traversal time varies by {:.3}%", spread * 100.0))?;

    let shifted = parallel_sweep(&sc, &[120.0, 150.0, 180.0, 210.0]).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for (base, other) in runs.iter().zip(&shifted) {
        let a = base.outcome.as_ref().map_err(|e| e.to_string())?;
        let b = other.outcome.as_ref().map_err(|e| e.to_string())?;
        check(a.summary.segments.len() == b.summary.segments.len(), || "segment count differs".into())?;
        for (sa, sb) in a.summary.segments.iter().zip(&b.summary.segments) {
            let (ma, mb) =
                (sa.mean_track_speeds.ok_or("missing speeds")?, sb.mean_track_speeds.ok_or("missing speeds")?);
            for j in 0..3 {
                worst = worst.max((mb[j] - ma[(j + 1) % 3]).abs());
                worst = worst.max((sb.analytic_speeds[j] - sa.analytic_speeds[(j + 1) % 3]).abs());
            }
            worst = worst.max((sa.duration().unwrap_or(0.0) - sb.duration().unwrap_or(0.0)).abs());
        }
        worst = worst.max((a.summary.max_compression - b.summary.max_compression).abs());
    }
    check(worst < 1e-9, || format!("θ vs θ+120° summaries differ by {worst:.2e}"))?;
    Ok(format!("time spread {:.2e}%, cyclic relabel error {worst:.2e}", spread * 100.0))
}

fn criterion_9() -> Outcome {
    let base = parse_scenario(scenario_path("four_section.json")).map_err(|e| e.to_string())?;

    let mut over = ScenarioFile::from_scenario(&base);
    over.robot.as_mut().unwrap().preload_mm = Some(17.0);
    match parse_scenario_str(&over.to_json()) {
        Err(ScenarioError::CompressionLimit { source: RobotError::CompressionLimit { .. }, .. }) => {}
        other => return Err(format!("preload 17 mm: expected CompressionLimit at parse, got {other:?}")),
    }
    let mut tight = base.clone();
    tight.robot.preload_mm = 15.0;
    match run(&tight) {
        Err(SimError::Robot(RobotError::CompressionLimit { required_mm, limit_mm, .. })) => {
            check(required_mm > 16.0 && limit_mm == 16.0, || format!("limit {required_mm} vs {limit_mm}"))?
        }
        other => return Err(format!("preload 15 mm: expected CompressionLimit in step, got {:?}", other.err())),
    }

    let out = run(&base).map_err(|e| e.to_string())?;
    let preload = base.robot.preload_mm;
    let extra = base.robot.bend_extra_compression_mm;
    check(extra == 1.5, || format!("configured extra compression {extra}"))?;
    let mut worst: f64 = 0.0;
    let mut bend_samples = 0;
    for r in &out.records {
        if base.network.segments()[r.segment_index].is_bend() {
            worst = worst.max((r.compressions[0] - (preload + extra)).abs());
            bend_samples += 1;
        } else {
            worst = worst.max(r.compressions.iter().fold(0.0, |m: f64, x| m.max((x - preload).abs())));
        }
    }
    check(bend_samples > 0, || "no bend samples".into())?;
    check(worst < 1e-9, || format!("compression off by {worst:.2e} mm"))?;
    Ok(format!("17 mm rejected at parse, 15 mm stopped in the elbow, bend module at {} mm", preload + extra))
}

fn criterion_10() -> Outcome {
    // (springs, mu, k N/m, x m, mass kg, r_s m) -> (f N, TE N, tau N·m), all by hand with g = 9.81.
    let cases = [
        ((12.0, 0.3, 1000.0, 0.0, 15.0, 0.02), (0.0, 147.15, 2.943)),
        ((12.0, 0.4, 2000.0, 0.01, 15.0, 0.02), (96.0, 51.15, 1.023)),
        ((12.0, 0.3, 1000.0, 0.016, 15.0, 0.02), (57.6, 89.55, 1.791)),
        ((12.0, 0.3, 1000.0, 0.01, 15.0, 0.02), (36.0, 111.15, 2.223)),
        ((8.0, 0.25, 1500.0, 0.012, 10.0, 0.025), (36.0, 62.1, 1.5525)),
        ((12.0, 0.5, 2000.0, 0.0122625, 15.0, 0.02), (147.15, 0.0, 0.0)),
    ];
    let eps = 8.0 * f64::EPSILON;
    for ((springs, mu, k, x, m, r), (f, te, tau)) in cases {
        let got_f = traction_force(springs, mu, k, x);
        let got_te = tractive_effort(m, springs, mu, k, x);
        let got_tau = sprocket_torque(got_te, r);
        let scale = m * 9.81;
        check((got_f - f).abs() <= eps * scale, || format!("f = {got_f}, expected {f}"))?;
        check((got_te - te).abs() <= eps * scale, || format!("TE = {got_te}, expected {te}"))?;
        check((got_tau - tau).abs() <= eps * scale * r, || format!("tau = {got_tau}, expected {tau}"))?;
    }
    let params = RobotParams::default();
    let t = params.traction_at(10.0);
    check((t.tractive_effort_n - 111.15).abs() <= eps * 147.15 && (t.torque_nm - 2.223).abs() <= eps * 3.0, || {
        format!("RobotParams::traction_at(10 mm) = {t:?}")
    })?;

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_000a);
    for _ in 0..1000 {
        let (mu, k, x, s) =
            (rng.gen_range(0.01..1.9), rng.gen_range(1.0..1e5), rng.gen_range(0.0..0.016), rng.gen_range(0.1..10.0));
        let f = traction_force(12.0, mu, k, x);
        let tol = 1e-12 * f.max(1e-12) * s;
        for scaled in
            [traction_force(12.0, mu * s, k, x), traction_force(12.0, mu, k * s, x), traction_force(12.0, mu, k, x * s)]
        {
            check((scaled - s * f).abs() <= tol, || format!("linearity broken at mu={mu}, k={k}, x={x}, s={s}"))?;
        }
    }
    Ok(format!("{} hand-computed sets exact, linearity holds over 1000 samples", cases.len()))
}

fn straight_elbow_network() -> PipeNetwork {
    PipeNetwork::build(
        &[SegmentSpec::straight(300.0), SegmentSpec::bend(300.0, 90.0, 0.0)],
        77.03,
        StartPose::default(),
    )
    .unwrap()
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("averaging law", criterion_1),
        ("equal torque and power balance", criterion_2),
        ("equal-slip closed form", criterion_3),
        ("internal-state oracle", criterion_4),
        ("bend kinematics 350:275:275", criterion_5),
        ("no-slip limit", criterion_6),
        ("APE parity", criterion_7),
        ("orientation independence", criterion_8),
        ("compression limits", criterion_9),
        ("formula fidelity", criterion_10),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    if failed.is_empty() {
        println!("all {} criteria passed", criteria.len());
        ExitCode::SUCCESS
    } else {
        println!("failed criteria: {failed:?}");
        ExitCode::FAILURE
    }
}
