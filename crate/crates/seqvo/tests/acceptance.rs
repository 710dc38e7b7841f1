//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness; exits non-zero if any criterion fails.

mod common;

use std::path::Path;
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use seqvo::manifest::Manifest;
use seqvo::traj::{format_kitti, format_tum, parse_kitti, parse_tum};
use seqvo_core::consistency::{
    adversarial_loss, frame_record, image_consistency, sequence_report, ssim, temporal_loss, total_loss, FlowDirection,
    LossTerms, LossWeights, MetricSelection, ScoreMap, SsimParams,
};
use seqvo_core::flo::{read_flo, write_flo, MAGIC};
use seqvo_core::se3::{euler_rpy_to_pose, interpolate, relative, rotation_angle, to_degrees};
use seqvo_core::synth::{gen_sequence, gen_trajectory, perturb_trajectory, AffineMotion, Drift, PathShape, PathSpec, SynthSpec};
use seqvo_core::voeval::{absolute_rmse, evaluate, EvalConfig};
use seqvo_core::{Error, Image, Pose, Trajectory, UnitQuaternion};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn flow_composition() -> Outcome {
    let mut worst = (0.0f64, 0.0f64);
    for direction in [FlowDirection::Source, FlowDirection::Target] {
        let spec = SynthSpec {
            frames: 20,
            width: 128,
            height: 96,
            motion: AffineMotion { translation: [1.2, -0.7], rotation: 0.004, scale: 1.003 },
            flow_direction: direction,
            ..SynthSpec::default()
        };
        let seq = gen_sequence(&spec).map_err(|e| e.to_string())?;
        let report = sequence_report(&seq.flows, MetricSelection::Both, direction).map_err(|e| e.to_string())?;
        for r in &report.records {
            if let Some(s) = r.e_tmp {
                worst.0 = worst.0.max(s.mean);
            }
            if let Some(s) = r.e_st {
                worst.1 = worst.1.max(s.mean);
            }
        }
    }
    ensure(worst.0 <= 1e-6 && worst.1 <= 1e-6, || format!("clean E_tmp {:e}, E_st {:e}", worst.0, worst.1))?;

    let seq = gen_sequence(&SynthSpec::default()).map_err(|e| e.to_string())?;
    let mut corrupted_means = Vec::new();
    for (du, dv) in [(2.0, 0.0), (0.0, -2.0), (2.0f64.sqrt(), 2.0f64.sqrt())] {
        let mut flows = seq.flows.clone();
        let step = flows[7].tmp_left.as_ref().expect("step flow").offset(du, dv);
        flows[7].tmp_left = Some(step);
        for t in [6, 7] {
            let rec = frame_record(t, flows.len(), &flows[t], flows.get(t + 1), MetricSelection::Temporal, FlowDirection::Source)
                .map_err(|e| e.to_string())?;
            corrupted_means.push(rec.e_tmp.expect("temporal record").mean);
        }
    }
    ensure(corrupted_means.iter().all(|m| (1.9..=2.1).contains(m)), || format!("corrupted E_tmp {corrupted_means:?}"))?;
    Ok(format!(
        "max clean E_tmp {:.2e} px, E_st {:.2e} px; 2 px corruption E_tmp in [{:.4}, {:.4}]",
        worst.0,
        worst.1,
        corrupted_means.iter().cloned().fold(f64::INFINITY, f64::min),
        corrupted_means.iter().cloned().fold(0.0, f64::max)
    ))
}

fn random_image(rng: &mut StdRng, w: usize, h: usize, c: usize) -> Image {
    Image::new(w, h, c, (0..w * h * c).map(|_| rng.random::<f64>()).collect()).expect("valid image")
}

fn ssim_and_f() -> Outcome {
    let mut rng = StdRng::seed_from_u64(20);
    for _ in 0..100 {
        let (w, h) = (rng.random_range(11..40), rng.random_range(11..30));
        let c = if rng.random_bool(0.5) { 1 } else { 3 };
        let a = random_image(&mut rng, w, h, c);
        let s = ssim(&a, &a).map_err(|e| e.to_string())?;
        ensure(s.mean == 1.0 && s.values.iter().all(|&v| v == 1.0), || format!("ssim(a,a) = {}", s.mean))?;
    }
    let p = SsimParams::default();
    let mut worst_closed = 0.0f64;
    for _ in 0..50 {
        let (x, y) = (rng.random::<f64>(), rng.random::<f64>());
        let a = Image::filled(16, 16, 1, x).unwrap();
        let b = Image::filled(16, 16, 1, y).unwrap();
        let expected = (2.0 * x * y + p.c1()) / (x * x + y * y + p.c1());
        worst_closed = worst_closed.max((ssim(&a, &b).unwrap().mean - expected).abs());
    }
    ensure(worst_closed <= 1e-9, || format!("constant-image SSIM off by {worst_closed:e}"))?;
    let mut worst_self = 0.0f64;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for _ in 0..1000 {
        let (w, h) = (rng.random_range(4..20), rng.random_range(4..20));
        let a = random_image(&mut rng, w, h, 1);
        let b = random_image(&mut rng, w, h, 1);
        let alpha = rng.random::<f64>();
        let f = image_consistency(&a, &b, alpha).map_err(|e| e.to_string())?;
        lo = lo.min(f);
        hi = hi.max(f);
        worst_self = worst_self.max(image_consistency(&a, &a, alpha).unwrap().abs());
    }
    ensure((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi), || format!("F range [{lo}, {hi}]"))?;
    ensure(worst_self <= 1e-12, || format!("F(a,a) = {worst_self:e}"))?;
    Ok(format!(
        "ssim(a,a)=1 on 100 images; closed form within {worst_closed:.1e}; F in [{lo:.3}, {hi:.3}] on 1000 pairs; max F(a,a) {worst_self:.1e}"
    ))
}

fn loss_arithmetic() -> Outcome {
    let ones = LossTerms { adv: 1.0, cy: 1.0, tmp: 1.0, st: 1.0 };
    let total = total_loss(&ones, &LossWeights::default());
    ensure(total == 17.0, || format!("total {total}"))?;
    let fake = ScoreMap::constant(4, 4, 0.5).unwrap();
    let real = ScoreMap::constant(4, 4, 0.75).unwrap();
    let adv = adversarial_loss(&fake, &real).map_err(|e| e.to_string())?;
    ensure(adv.generator == 0.25 && adv.discriminator == 0.3125, || format!("{adv:?}"))?;
    Ok(format!("total {total}; adversarial ({}, {})", adv.generator, adv.discriminator))
}

fn vo_metrics() -> Outcome {
    let straight = gen_trajectory(&PathSpec { shape: PathShape::Straight, speed: 10.0, fps: 10.0 }, 901).unwrap();
    let scaled = perturb_trajectory(&straight, &Drift { scale_per_meter: 0.01, ..Drift::default() });
    let m = evaluate(&straight, &scaled, &EvalConfig::default()).map_err(|e| e.to_string())?;
    ensure((m.t_rel - 1.0).abs() <= 1e-6, || format!("scale drift t_rel {}", m.t_rel))?;

    let rate = 1e-3;
    let rotated = perturb_trajectory(&straight, &Drift { rotation_per_meter: rate, ..Drift::default() });
    let r = evaluate(&straight, &rotated, &EvalConfig::default()).map_err(|e| e.to_string())?;
    let expected = to_degrees(rate) * 100.0;
    ensure((r.r_rel - expected).abs() <= 1e-6, || format!("rotation drift r_rel {} vs {expected}", r.r_rel))?;

    let circle = gen_trajectory(&PathSpec { shape: PathShape::Circle { circumference: 500.0 }, ..PathSpec::default() }, 600).unwrap();
    let g = euler_rpy_to_pose(0.4, -0.9, 2.5, [120.0, -35.0, 7.0]);
    let moved = circle.left_multiplied(&g);
    let config = EvalConfig { lengths: vec![50.0, 100.0, 200.0, 400.0], align: true, ..EvalConfig::default() };
    let rigid = evaluate(&circle, &moved, &config).map_err(|e| e.to_string())?;
    ensure(rigid.t_rel.abs() <= 1e-9 && rigid.r_rel.abs() <= 1e-9, || format!("rigid t_rel {} r_rel {}", rigid.t_rel, rigid.r_rel))?;
    let ate = absolute_rmse(circle.poses(), moved.poses(), true).map_err(|e| e.to_string())?;
    ensure(ate.t_abs <= 1e-9 && ate.r_abs <= 1e-9, || format!("aligned ATE {} m, {} deg", ate.t_abs, ate.r_abs))?;
    Ok(format!(
        "t_rel {:.9}%; r_rel {:.9} vs {:.9} deg/100m; rigid offset t_rel {:.1e} r_rel {:.1e}; aligned ATE {:.1e} m",
        m.t_rel, r.r_rel, expected, rigid.t_rel, rigid.r_rel, ate.t_abs
    ))
}

fn interpolation() -> Outcome {
    let mut rng = StdRng::seed_from_u64(50);
    for _ in 0..100 {
        let q = |rng: &mut StdRng| {
            UnitQuaternion::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                .unwrap()
        };
        let a = Pose::new(q(&mut rng), [rng.random(), rng.random(), rng.random()]);
        let b = Pose::new(q(&mut rng), [rng.random(), rng.random(), rng.random()]);
        let traj = Trajectory::new(vec![2.0, 3.5], vec![a, b]).unwrap();
        for (t, p) in [(2.0, a), (3.5, b)] {
            let got = interpolate(&traj, t).map_err(|e| e.to_string())?;
            ensure(got.rotation.wxyz() == p.rotation.wxyz() && got.translation == p.translation, || format!("endpoint {t}: {got:?}"))?;
        }
    }
    let axis = [1.0 / 3.0f64.sqrt(); 3];
    let end = Pose::new(UnitQuaternion::from_axis_angle(axis, std::f64::consts::FRAC_PI_2), [2.0, 0.0, -4.0]);
    let traj = Trajectory::new(vec![0.0, 1.0], vec![Pose::IDENTITY, end]).unwrap();
    let mid = interpolate(&traj, 0.5).map_err(|e| e.to_string())?;
    let want = UnitQuaternion::from_axis_angle(axis, std::f64::consts::FRAC_PI_4).wxyz();
    let err = (0..4).map(|k| (mid.rotation.wxyz()[k] - want[k]).abs()).fold(0.0, f64::max);
    ensure(err <= 1e-12 && mid.translation == [1.0, 0.0, -2.0], || format!("45-degree midpoint off by {err:e}"))?;
    for t in [-0.001, 1.0 + 1e-9, 7.0] {
        ensure(matches!(interpolate(&traj, t), Err(Error::Extrapolation { .. })), || format!("t={t} accepted"))?;
    }
    Ok(format!("100 random endpoint pairs bit-exact; 45-degree midpoint within {err:.1e}; out-of-range rejected"))
}

fn random_flo_bytes(rng: &mut StdRng) -> Vec<u8> {
    let (w, h) = (rng.random_range(1..24u32), rng.random_range(1..24u32));
    let mut bytes = Vec::with_capacity(12 + 8 * (w * h) as usize);
    bytes.extend(MAGIC.to_le_bytes());
    bytes.extend(w.to_le_bytes());
    bytes.extend(h.to_le_bytes());
    for _ in 0..2 * w * h {
        let v: f32 = match rng.random_range(0..20) {
            0 => 1e10,
            1 => -3e9,
            2 => f32::INFINITY,
            _ => rng.random_range(-300.0..300.0),
        };
        bytes.extend(v.to_le_bytes());
    }
    bytes
}

fn random_trajectory(rng: &mut StdRng, n: usize) -> Trajectory {
    let mut t = 0.0;
    Trajectory::from_samples((0..n).map(|_| {
        t += rng.random_range(0.01..0.5);
        let pose = euler_rpy_to_pose(
            rng.random_range(-3.1..3.1),
            rng.random_range(-1.5..1.5),
            rng.random_range(-3.1..3.1),
            [rng.random_range(-1e3..1e3), rng.random_range(-1e3..1e3), rng.random_range(-1e2..1e2)],
        );
        (t, pose)
    }))
    .unwrap()
}

fn pose_gap(a: &Pose, b: &Pose) -> f64 {
    let d = relative(a, b);
    (0..3).map(|k| (a.translation[k] - b.translation[k]).abs()).fold(rotation_angle(&d), f64::max)
}

fn io_round_trips() -> Outcome {
    let mut rng = StdRng::seed_from_u64(60);
    for k in 0..1000 {
        let bytes = random_flo_bytes(&mut rng);
        let field = read_flo(&bytes).map_err(|e| format!("field {k}: {e}"))?;
        ensure(write_flo(&field) == bytes, || format!("field {k} not bit-exact"))?;
    }
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let traj = random_trajectory(&mut rng, 100);
        let tum = parse_tum(&format_tum(&traj, &[])).map_err(|e| e.to_string())?;
        let kitti = parse_kitti(&format_kitti(&traj)).map_err(|e| e.to_string())?;
        ensure(tum.timestamps() == traj.timestamps(), || "TUM timestamps changed".into())?;
        for ((a, b), c) in traj.poses().iter().zip(tum.poses()).zip(kitti.poses()) {
            worst = worst.max(pose_gap(a, b)).max(pose_gap(a, c));
        }
    }
    ensure(worst <= 1e-9, || format!("trajectory round trip off by {worst:e}"))?;
    let frame = |i: usize, t: f64| format!(r#"{{"index":{i},"timestamp":{t},"left":"l{i}.png","right":"r{i}.png"}}"#);
    let gapped = format!(r#"{{"schema":1,"frames":[{},{},{}]}}"#, frame(0, 0.0), frame(1, 0.1), frame(3, 0.2));
    let contiguous = gapped.replace("\"index\":3", "\"index\":2");
    ensure(Manifest::parse(&gapped).is_err(), || "non-contiguous manifest accepted".into())?;
    ensure(Manifest::parse(&contiguous).is_ok(), || "contiguous manifest rejected".into())?;
    Ok(format!("1000 .flo fields bit-exact; TUM/KITTI max pose error {worst:.1e}; index gap rejected"))
}

fn run_both(dir: &Path, args: &[&str], outputs: &[&str]) -> Result<(), String> {
    let mut results = Vec::new();
    for threads in ["1", "8", "8"] {
        let tag = format!("t{threads}_{}", results.len());
        let mut full: Vec<String> = vec!["--threads".into(), threads.into()];
        full.extend(args.iter().map(|a| a.replace("{out}", &tag)));
        let refs: Vec<&str> = full.iter().map(String::as_str).collect();
        let out = common::seqvo(dir, &refs);
        if !out.status.success() {
            return Err(format!("{args:?} failed: {}", common::stderr(&out)));
        }
        let mut files = Vec::new();
        for o in outputs {
            let p = dir.join(o.replace("{out}", &tag));
            files.push(if p.is_dir() {
                common::snapshot(&p)
            } else {
                std::iter::once((o.into(), std::fs::read(&p).map_err(|e| format!("{}: {e}", p.display()))?)).collect()
            });
        }
        results.push((out.stdout, files));
    }
    ensure(results.windows(2).all(|w| w[0] == w[1]), || format!("{} differs between runs", args[0]))
}

fn cli_determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let dir = tmp.path();
    common::write(&dir.join("spec.json"), r#"{"frames": 20, "seed": 3}"#);
    run_both(dir, &["synth", "--spec", "spec.json", "-o", "{out}"], &["{out}"])?;
    common::write(&dir.join("spec.json"), r#"{"frames": 20, "seed": 3}"#);
    common::seqvo(dir, &["synth", "--spec", "spec.json", "-o", "seq"]);
    run_both(dir, &["consistency", "seq/manifest.json", "-o", "{out}"], &["{out}"])?;
    run_both(dir, &["--format", "json", "consistency", "seq/manifest.json", "-o", "{out}"], &["{out}"])?;

    let gt = gen_trajectory(&PathSpec { shape: PathShape::Circle { circumference: 150.0 }, ..PathSpec::default() }, 400).unwrap();
    common::write(&dir.join("gt.tum"), &format_tum(&gt, &[]));
    for k in 0..4u64 {
        let est = perturb_trajectory(&gt, &Drift { scale_per_meter: 0.002 * k as f64, rotation_per_meter: 1e-4, translation_noise: 0.01, rotation_noise: 1e-3, seed: k });
        common::write(&dir.join(format!("est{k}.txt")), &format_kitti(&est));
        common::write(&dir.join(format!("est{k}.tum")), &format_tum(&est, &[]));
    }
    let ests = ["est0.tum", "est1.tum", "est2.tum", "est3.tum"];
    let mut vo = vec!["voeval", "--gt", "gt.tum", "--lengths", "10,20,40", "--align", "-o", "{out}"];
    vo.extend(ests);
    run_both(dir, &vo, &["{out}"])?;
    let mut vo_json = vec!["--format", "json"];
    vo_json.extend(&vo);
    run_both(dir, &vo_json, &["{out}"])?;

    let mut ins = String::from("timestamp,northing,easting,down,roll,pitch,yaw\n");
    let mut stamps = String::new();
    for k in 0..50i64 {
        ins += &format!("{},{},{},0,0.01,0.02,{}\n", 1_000_000 + 100_000 * k, k, 0.5 * k as f64, 0.05 * k as f64);
        stamps += &format!("{}\n", 1_000_000 + 100_000 * k + 37_000);
    }
    common::write(&dir.join("ins.csv"), &ins);
    common::write(&dir.join("ts.txt"), &stamps);
    run_both(dir, &["interp", "--gpsins", "ins.csv", "--timestamps", "ts.txt", "-o", "{out}.tum"], &["{out}.tum"])?;
    run_both(dir, &["interp", "--gpsins", "ins.csv", "--timestamps", "ts.txt"], &[])?;

    common::write(&dir.join("fake.txt"), "0.1 0.4\n0.3 0.2\n");
    common::write(&dir.join("real.txt"), "0.9 0.8\n");
    let loss = [
        "loss", "--x", "seq/left/000000.png", "--x-recon", "seq/left/000001.png",
        "--prev", "seq/left/000000.png", "--curr", "seq/left/000001.png", "--tmp-flow", "seq/flows/tmp_left_000000.flo",
        "--left", "seq/left/000000.png", "--right", "seq/right/000000.png", "--stereo-flow", "seq/flows/stereo_000000.flo",
        "--fake", "fake.txt", "--real", "real.txt",
    ];
    run_both(dir, &loss, &[])?;
    run_both(dir, &["warp", "--image", "seq/right/000004.png", "--flow", "seq/flows/tmp_right_000004.flo", "-o", "{out}/w.png"], &["{out}"])?;
    Ok("synth, consistency, voeval, interp, loss, warp byte-identical over 3 runs (threads 1, 8, 8)".into())
}

fn flicker_sensitivity() -> Outcome {
    let base = SynthSpec { flow_direction: FlowDirection::Target, ..SynthSpec::default() };
    let clean = gen_sequence(&base).map_err(|e| e.to_string())?;
    let mut gains = vec![1.0; base.frames];
    for g in gains.iter_mut().step_by(2) {
        *g = 0.5;
    }
    let flicker = gen_sequence(&SynthSpec { flicker: gains, ..base.clone() }).map_err(|e| e.to_string())?;
    let mut worst_ratio = f64::INFINITY;
    for t in 0..base.frames - 1 {
        let flow = clean.flows[t].tmp_left.as_ref().expect("step flow");
        let l_clean = temporal_loss(clean.frames[t].left(), clean.frames[t + 1].left(), flow, 0.8).map_err(|e| e.to_string())?;
        let l_flicker = temporal_loss(flicker.frames[t].left(), flicker.frames[t + 1].left(), flow, 0.8).map_err(|e| e.to_string())?;
        worst_ratio = worst_ratio.min(l_flicker / l_clean);
        ensure(l_flicker > 5.0 * l_clean, || format!("frame {t}: flicker {l_flicker:e} vs clean {l_clean:e}"))?;
    }
    Ok(format!("flicker/clean temporal loss ratio >= {worst_ratio:.0} on every frame pair"))
}

fn main() {
    let started = Instant::now();
    let criteria: [Criterion; 8] = [
        ("flow composition oracle", flow_composition),
        ("SSIM and image consistency", ssim_and_f),
        ("loss arithmetic", loss_arithmetic),
        ("trajectory metric oracle", vo_metrics),
        ("pose interpolation", interpolation),
        ("file round trips and manifest validation", io_round_trips),
        ("CLI determinism", cli_determinism),
        ("flicker sensitivity", flicker_sensitivity),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t0.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {} {name} ({secs:.2}s): {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} {name} ({secs:.2}s): {detail}", k + 1);
            }
        }
    }
    println!(
        "acceptance: {}/{} passed in {:.1}s",
        criteria.len() - failed,
        criteria.len(),
        started.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}

