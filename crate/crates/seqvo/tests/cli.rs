mod common;

use common::{code, json, seqvo, snapshot, stderr, write};
use seqvo::traj::{format_tum, parse_gpsins, parse_tum};
use seqvo_core::se3::{interpolate, to_degrees};
use seqvo_core::synth::{gen_trajectory, perturb_trajectory, Drift, PathSpec};

fn synth(dir: &std::path::Path, name: &str, spec: &str) {
    write(&dir.join(format!("{name}.json")), spec);
    let out = seqvo(dir, &["synth", "--spec", &format!("{name}.json"), "--out", name]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
}

#[test]
fn synth_then_consistency_is_zero_in_both_directions() {
    let dir = tempfile::tempdir().unwrap();
    for direction in ["source", "target"] {
        let name = format!("seq_{direction}");
        synth(dir.path(), &name, &format!(r#"{{"frames": 8, "flow_direction": "{direction}"}}"#));
        let out = seqvo(dir.path(), &["consistency", &format!("{name}/manifest.json"), "-o", &format!("rep_{direction}")]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        let report = json(&dir.path().join(format!("rep_{direction}/consistency.json")));
        assert!(report["aggregates"]["e_tmp"]["mean"].as_f64().unwrap() <= 1e-6);
        assert!(report["aggregates"]["e_st"]["mean"].as_f64().unwrap() <= 1e-6);
        assert_eq!(report["frames"].as_array().unwrap().len(), 7);
        assert_eq!(report["metadata"]["flags"]["flow_direction"], direction);
        let csv = std::fs::read_to_string(dir.path().join(format!("rep_{direction}/consistency.csv"))).unwrap();
        assert!(csv.contains("\nframe,e_tmp_mean,e_tmp_median,e_st_mean,e_st_median,valid_px\n"));
        assert_eq!(String::from_utf8(out.stdout).unwrap(), csv);
    }
}

#[test]
fn two_frame_manifest_is_too_short_for_temporal() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "seq", r#"{"frames": 3}"#);
    let path = dir.path().join("seq/manifest.json");
    let mut m: serde_json::Value = json(&path);
    m["frames"].as_array_mut().unwrap().truncate(2);
    write(&dir.path().join("seq/short.json"), &m.to_string());
    let out = seqvo(dir.path(), &["consistency", "seq/short.json", "-o", "rep"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("sequence too short"), "{}", stderr(&out));
    let ok = seqvo(dir.path(), &["consistency", "seq/short.json", "-o", "rep", "--metrics", "st"]);
    assert_eq!(code(&ok), 0, "{}", stderr(&ok));
}

#[test]
fn malformed_manifest_exits_one_and_missing_file_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "seq", r#"{"frames": 4}"#);
    let mut m: serde_json::Value = json(&dir.path().join("seq/manifest.json"));
    m["frames"][2]["index"] = 7.into();
    write(&dir.path().join("seq/gap.json"), &m.to_string());
    let out = seqvo(dir.path(), &["consistency", "seq/gap.json", "-o", "rep"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("contiguous"));

    write(&dir.path().join("seq/broken.json"), "{ not json");
    assert_eq!(code(&seqvo(dir.path(), &["consistency", "seq/broken.json", "-o", "rep"])), 1);

    std::fs::remove_file(dir.path().join("seq/flows/skip_left_000001.flo")).unwrap();
    let out = seqvo(dir.path(), &["consistency", "seq/manifest.json", "-o", "rep"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("skip_left_000001.flo"), "{}", stderr(&out));
}

#[test]
fn crop_rows_shrinks_every_flow() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "seq", r#"{"frames": 4, "width": 40, "height": 30}"#);
    let mut m: serde_json::Value = json(&dir.path().join("seq/manifest.json"));
    m["crop_rows"] = 10.into();
    write(&dir.path().join("seq/crop.json"), &m.to_string());
    for (manifest, rep) in [("seq/manifest.json", "full"), ("seq/crop.json", "crop")] {
        assert_eq!(code(&seqvo(dir.path(), &["consistency", manifest, "-o", rep, "--metrics", "st"])), 0);
    }
    let full = json(&dir.path().join("full/consistency.json"));
    let crop = json(&dir.path().join("crop/consistency.json"));
    let px = |v: &serde_json::Value| v["frames"][0]["valid_px"].as_u64().unwrap();
    assert!(px(&crop) < px(&full));
    assert!(px(&crop) <= 40 * 20);
}

fn drifted_pair(dir: &std::path::Path) -> (String, String) {
    let gt = gen_trajectory(&PathSpec::default(), 301).unwrap();
    let est = perturb_trajectory(&gt, &Drift { rotation_per_meter: 1e-3, ..Drift::default() });
    write(&dir.join("gt.tum"), &format_tum(&gt, &[]));
    write(&dir.join("est.tum"), &format_tum(&est, &[]));
    ("gt.tum".into(), "est.tum".into())
}

#[test]
fn voeval_rows_and_median() {
    let dir = tempfile::tempdir().unwrap();
    let (gt, est) = drifted_pair(dir.path());
    let out = seqvo(dir.path(), &["--format", "json", "voeval", "--gt", &gt, &gt, &est, &est, &est, &est, &est, "--lengths", "50,100,200", "-o", "vo"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let rows = doc["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 6);
    for key in ["t_rel", "r_rel", "t_abs", "r_abs"] {
        assert_eq!(rows[0][key].as_f64().unwrap(), 0.0, "{key}");
    }
    let expected = to_degrees(1e-3) * 100.0;
    assert!((rows[1]["r_rel"].as_f64().unwrap() - expected).abs() < 1e-6);
    let mut median = doc["median"].clone();
    median["estimate"] = rows[1]["estimate"].clone();
    assert_eq!(median, rows[1]);
    for f in ["metrics.json", "gt_path.txt", "est0_path.txt", "est5_t_rel.txt", "est5_r_rel.txt"] {
        assert!(dir.path().join("vo").join(f).is_file(), "{f}");
    }
    let curve = std::fs::read_to_string(dir.path().join("vo/est1_r_rel.txt")).unwrap();
    assert_eq!(curve.lines().count(), 3);
    assert!(curve.lines().all(|l| l.split(' ').count() == 2));

    let deg = seqvo(dir.path(), &["--format", "csv", "voeval", "--gt", &gt, &est, "--lengths", "100", "--r-unit", "deg"]);
    let text = String::from_utf8(deg.stdout).unwrap();
    assert!(text.lines().any(|l| l.starts_with("est.tum,") && l.contains(",deg,")));
}

#[test]
fn voeval_association_failure_names_file() {
    let dir = tempfile::tempdir().unwrap();
    let (gt, _) = drifted_pair(dir.path());
    let traj = parse_tum(&std::fs::read_to_string(dir.path().join(&gt)).unwrap()).unwrap();
    let shifted = seqvo_core::Trajectory::new(traj.timestamps().iter().map(|t| t + 1000.0).collect(), traj.poses().to_vec()).unwrap();
    write(&dir.path().join("late.tum"), &format_tum(&shifted, &[]));
    let out = seqvo(dir.path(), &["voeval", "--gt", &gt, "late.tum"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("late.tum"));
    assert_eq!(code(&seqvo(dir.path(), &["voeval", "--gt", &gt, "absent.tum"])), 2);
    assert_eq!(code(&seqvo(dir.path(), &["voeval", "--gt", &gt])), 1);
}

const INS: &str = "timestamp,northing,easting,down,roll,pitch,yaw\n\
1000000,0,0,0,0,0,0\n\
2000000,2,4,-1,0,0,1.5707963267948966\n\
3000000,3,4,-1,0.1,0.2,1.0\n";

#[test]
fn interp_endpoints_midpoints_and_dropped_stamps() {
    let dir = tempfile::tempdir().unwrap();
    write(&dir.path().join("ins.csv"), INS);
    write(&dir.path().join("ts.txt"), "0\n1000000\n1500000\n2000000\n2750000\n3000000\n9000000\n");
    let out = seqvo(dir.path(), &["interp", "--gpsins", "ins.csv", "--timestamps", "ts.txt", "-o", "gt.tum"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let got = parse_tum(&std::fs::read_to_string(dir.path().join("gt.tum")).unwrap()).unwrap();
    let ins = parse_gpsins(INS).unwrap();
    assert_eq!(got.timestamps(), &[1.0, 1.5, 2.0, 2.75, 3.0]);
    for (t, p) in got.timestamps().iter().zip(got.poses()) {
        let q = interpolate(&ins, *t).unwrap();
        assert_eq!(p.translation, q.translation);
        let (a, b) = (p.rotation.wxyz(), q.rotation.wxyz());
        assert!((0..4).all(|k| (a[k] - b[k]).abs() < 1e-15));
    }
    let mid = &got.poses()[1];
    assert_eq!(mid.translation, [1.0, 2.0, -0.5]);
    let h = std::f64::consts::FRAC_PI_8;
    assert!((mid.rotation.w() - h.cos()).abs() < 1e-12 && (mid.rotation.z() - h.sin()).abs() < 1e-12);

    write(&dir.path().join("none.txt"), "9000000\n");
    let out = seqvo(dir.path(), &["interp", "--gpsins", "ins.csv", "--timestamps", "none.txt"]);
    assert_eq!(code(&out), 1);
    write(&dir.path().join("secs.txt"), "1.25\n");
    let out = seqvo(dir.path(), &["interp", "--gpsins", "ins.csv", "--timestamps", "secs.txt", "--timestamps-unit", "s"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8(out.stdout).unwrap().lines().any(|l| l.starts_with("1.25 ")));
}

#[test]
fn loss_terms_and_flicker() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "clean", r#"{"frames": 3, "flow_direction": "target"}"#);
    synth(dir.path(), "flicker", r#"{"frames": 3, "flow_direction": "target", "flicker": [0.5, 1.0, 1.0]}"#);
    let l_tmp = |name: &str| {
        let out = seqvo(
            dir.path(),
            &[
                "--flow-direction", "target", "loss",
                "--prev", &format!("{name}/left/000000.png"),
                "--curr", &format!("{name}/left/000001.png"),
                "--tmp-flow", &format!("{name}/flows/tmp_left_000000.flo"),
            ],
        );
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        assert!(v["l_cy"].is_null() && v["l_adv"].is_null() && v["l_st"].is_null());
        assert_eq!(v["weights"]["tmp"], 3.0);
        v["l_tmp"].as_f64().unwrap()
    };
    assert!(l_tmp("flicker") > 5.0 * l_tmp("clean"));

    write(&dir.path().join("zero.flo"), "");
    let zero = seqvo_core::FlowField::zeros(128, 96).unwrap();
    std::fs::write(dir.path().join("zero.flo"), seqvo_core::flo::write_flo(&zero)).unwrap();
    let img = "clean/left/000000.png";
    let out = seqvo(
        dir.path(),
        &["loss", "--x", img, "--x-recon", img, "--prev", img, "--curr", img, "--tmp-flow", "zero.flo",
          "--left", img, "--right", img, "--stereo-flow", "zero.flo"],
    );
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for k in ["l_cy", "l_tmp", "l_st", "total"] {
        assert_eq!(v[k], 0.0, "{k}");
    }

    write(&dir.path().join("fake.txt"), "0 0\n0 0\n");
    write(&dir.path().join("real.txt"), "1 1\n");
    let out = seqvo(dir.path(), &["--format", "csv", "loss", "--fake", "fake.txt", "--real", "real.txt", "--weights", "2,10,3,3"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().last().unwrap().starts_with("1,,,,2,2,10,3,3,0.8"), "{text}");

    assert_eq!(code(&seqvo(dir.path(), &["loss"])), 1);
    assert_eq!(code(&seqvo(dir.path(), &["loss", "--fake", "fake.txt"])), 1);
    assert_eq!(code(&seqvo(dir.path(), &["loss", "--fake", "fake.txt", "--real", "real.txt", "--weights", "1,2"])), 1);
}

#[test]
fn warp_zero_flow_reproduces_input() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path(), "seq", r#"{"frames": 3, "width": 20, "height": 10}"#);
    let zero = seqvo_core::FlowField::zeros(20, 10).unwrap();
    std::fs::write(dir.path().join("zero.flo"), seqvo_core::flo::write_flo(&zero)).unwrap();
    let out = seqvo(dir.path(), &["warp", "--image", "seq/left/000001.png", "--flow", "zero.flo", "--out", "w/out.png"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let a = seqvo::imageio::read_image(&dir.path().join("seq/left/000001.png")).unwrap();
    let b = seqvo::imageio::read_image(&dir.path().join("w/out.png")).unwrap();
    assert_eq!(a, b);
    let mask = seqvo::imageio::read_image(&dir.path().join("w/out_mask.png")).unwrap();
    assert!(mask.image.data().iter().all(|&v| v == 1.0));

    let shift = seqvo_core::FlowField::constant(20, 10, 3.0, 0.0).unwrap();
    std::fs::write(dir.path().join("shift.flo"), seqvo_core::flo::write_flo(&shift)).unwrap();
    let out = seqvo(dir.path(), &["warp", "--image", "seq/left/000001.png", "--flow", "shift.flo", "--out", "s.png", "--mask", "m.png"]);
    assert_eq!(code(&out), 0);
    let mask = seqvo::imageio::read_image(&dir.path().join("m.png")).unwrap().image;
    assert_eq!(mask.data().iter().filter(|&&v| v == 0.0).count(), 3 * 10);

    let small = seqvo_core::FlowField::zeros(5, 5).unwrap();
    std::fs::write(dir.path().join("small.flo"), seqvo_core::flo::write_flo(&small)).unwrap();
    assert_eq!(code(&seqvo(dir.path(), &["warp", "--image", "seq/left/000001.png", "--flow", "small.flo", "--out", "x.png"])), 2);
}

#[test]
fn synth_is_deterministic_and_rejects_bad_specs() {
    let dir = tempfile::tempdir().unwrap();
    write(&dir.path().join("spec.json"), r#"{"frames": 4, "seed": 11}"#);
    assert_eq!(code(&seqvo(dir.path(), &["synth", "--spec", "spec.json", "-o", "a"])), 0);
    assert_eq!(code(&seqvo(dir.path(), &["--threads", "1", "synth", "--spec", "spec.json", "-o", "b"])), 0);
    assert_eq!(snapshot(&dir.path().join("a")), snapshot(&dir.path().join("b")));
    let gt = parse_tum(&std::fs::read_to_string(dir.path().join("a/trajectory.tum")).unwrap()).unwrap();
    assert_eq!(gt.len(), 4);

    write(&dir.path().join("bad.json"), r#"{"frames": "many"}"#);
    assert_eq!(code(&seqvo(dir.path(), &["synth", "--spec", "bad.json", "-o", "c"])), 1);
    write(&dir.path().join("tiny.json"), r#"{"frames": 1}"#);
    assert_eq!(code(&seqvo(dir.path(), &["synth", "--spec", "tiny.json", "-o", "c"])), 2);
}

#[test]
fn usage_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&seqvo(dir.path(), &["--help"])), 0);
    assert_eq!(code(&seqvo(dir.path(), &["--version"])), 0);
    assert_eq!(code(&seqvo(dir.path(), &[])), 1);
    assert_eq!(code(&seqvo(dir.path(), &["frobnicate"])), 1);
    assert_eq!(code(&seqvo(dir.path(), &["--format", "xml", "loss"])), 1);
}
