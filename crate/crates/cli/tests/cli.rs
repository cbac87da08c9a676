mod common;

use common::*;
use pcbfire::faultgen::GroundTruth;
use pcbfire::{decode_image, BBox, ComponentClass, Detection, EvalReport, FaultReport, RasterImage};

fn det(class: ComponentClass, x: i32, y: i32, w: u32, h: u32, conf: f64) -> Detection {
    Detection::new(class, BBox::new(x, y, w, h).unwrap(), conf).unwrap()
}

/// 30x10 board with three bright 4x4 components.
fn small_board() -> (RasterImage, Vec<Detection>) {
    let mut img = RasterImage::filled(30, 10, 5).unwrap();
    let dets = vec![
        det(ComponentClass::Capacitor, 1, 1, 4, 4, 0.9),
        det(ComponentClass::Resistor, 8, 1, 4, 4, 0.8),
        det(ComponentClass::Ic, 15, 1, 4, 4, 0.7),
    ];
    for d in &dets {
        for y in d.bbox.y..d.bbox.y + d.bbox.h as i32 {
            for x in d.bbox.x..d.bbox.x + d.bbox.w as i32 {
                img.set(x as u32, y as u32, 230);
            }
        }
    }
    (img, dets)
}

#[test]
fn identical_images_exit_clean() {
    let dir = tempfile::tempdir().unwrap();
    let (img, dets) = small_board();
    let d = write_png(dir.path(), "design.png", &img);
    let j = write_dets(dir.path(), "dets.json", img.dims(), &dets);
    let out_path = dir.path().join("report.json");
    let out = run(&["inspect", s(&d), s(&d), s(&j), "--out", s(&out_path)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report: FaultReport = serde_json::from_slice(&std::fs::read(&out_path).unwrap()).unwrap();
    assert!(report.missing.is_empty());
    assert_eq!(report.total_detections, 3);
}

#[test]
fn erased_capacitor_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let (img, dets) = small_board();
    let design = write_png(dir.path(), "board.png", &img);
    let j = write_dets(dir.path(), "board.json", img.dims(), &dets);
    let gen = dir.path().join("gen");
    let out = run(&["inject", s(&design), s(&j), "--k", "1", "--out", s(&gen)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    // case 0 erases detection 0, the capacitor
    let test = gen.join("board_missing1_0.png");
    let out = run(&["inspect", s(&design), s(&test), s(&j)]);
    assert_eq!(code(&out), 2);
    let report: FaultReport = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report.missing.len(), 1);
    assert_eq!(report.missing[0].detection.class, ComponentClass::Capacitor);
}

#[test]
fn mismatched_sizes_exit_with_error() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_png(dir.path(), "a.png", &RasterImage::filled(100, 100, 0).unwrap());
    let b = write_png(dir.path(), "b.png", &RasterImage::filled(90, 90, 0).unwrap());
    let j = write_dets(dir.path(), "d.json", (100, 100), &[]);
    let out = run(&["inspect", s(&a), s(&b), s(&j)]);
    assert_eq!(code(&out), 1);
    let err = String::from_utf8(out.stderr).unwrap();
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.contains("dimension mismatch"), "{err}");
}

#[test]
fn unreadable_inputs_exit_with_error() {
    let dir = tempfile::tempdir().unwrap();
    let junk = dir.path().join("junk.png");
    std::fs::write(&junk, b"not an image").unwrap();
    let j = write_dets(dir.path(), "d.json", (4, 4), &[]);
    assert_eq!(code(&run(&["inspect", s(&junk), s(&junk), s(&j)])), 1);
    assert_eq!(code(&run(&["inspect", "/nonexistent.png", s(&junk), s(&j)])), 1);

    let img = write_png(dir.path(), "ok.png", &RasterImage::filled(4, 4, 0).unwrap());
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "7 0.5 0.5 0.2 0.2\n").unwrap();
    let out = run(&["inspect", s(&img), s(&img), s(&bad)]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown class id 7"));
}

#[test]
fn darknet_detections_drive_inspect() {
    let dir = tempfile::tempdir().unwrap();
    let (img, dets) = small_board();
    let design = write_png(dir.path(), "design.png", &img);
    let txt = dir.path().join("dets.txt");
    std::fs::write(&txt, pcbfire::detect::to_darknet(&dets, img.dims())).unwrap();
    let mut test = img.clone();
    for y in 1..5 {
        for x in 15..19 {
            test.set(x, y, 5);
        }
    }
    let t = write_png(dir.path(), "test.png", &test);
    let out = run(&["inspect", s(&design), s(&t), s(&txt)]);
    assert_eq!(code(&out), 2);
    let report: FaultReport = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report.missing_detections(), vec![dets[2]]);
}

#[test]
fn annotation_only_touches_strokes() {
    let dir = tempfile::tempdir().unwrap();
    let (img, dets) = small_board();
    let design = write_png(dir.path(), "design.png", &img);
    let j = write_dets(dir.path(), "d.json", img.dims(), &dets);
    let mut test = img.clone();
    for y in 1..5 {
        for x in 8..12 {
            test.set(x, y, 5);
        }
    }
    let t = write_png(dir.path(), "test.png", &test);
    let ann = dir.path().join("ann.png");
    let out = run(&["inspect", s(&design), s(&t), s(&j), "--annotate", s(&ann)]);
    assert_eq!(code(&out), 2);

    let bytes = std::fs::read(&ann).unwrap();
    let mut reader = png::Decoder::new(std::io::Cursor::new(bytes)).read_info().unwrap();
    let mut buf = vec![0; reader.output_buffer_size()];
    let info = reader.next_frame(&mut buf).unwrap();
    assert_eq!(info.color_type, png::ColorType::Rgb);
    let b = dets[1].bbox;
    for y in 0..10u32 {
        for x in 0..30u32 {
            let i = 3 * (y * 30 + x) as usize;
            let px = &buf[i..i + 3];
            let (bx, by) = (x as i32 - b.x, y as i32 - b.y);
            let in_box = bx >= 0 && by >= 0 && bx < b.w as i32 && by < b.h as i32;
            let on_stroke = in_box && (bx < 2 || by < 2 || bx >= b.w as i32 - 2 || by >= b.h as i32 - 2);
            if on_stroke {
                assert_eq!(px, &[255, 0, 0], "resistor stroke at ({x}, {y})");
            } else {
                let g = test.get(x, y).unwrap();
                assert_eq!(px, &[g, g, g], "untouched at ({x}, {y})");
            }
        }
    }
}

#[test]
fn config_sets_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let (img, dets) = small_board();
    let design = write_png(dir.path(), "design.png", &img);
    let j = write_dets(dir.path(), "d.json", img.dims(), &dets);
    let mut test = img.clone();
    test.set(2, 2, 5);
    let t = write_png(dir.path(), "test.png", &test);
    let cfg = dir.path().join("pcbfire.toml");
    std::fs::write(&cfg, "min_diff_pixels = 2\nsubtract_mode = \"absolute\"\n").unwrap();

    // one changed pixel: config demands two
    let out = run(&["--config", s(&cfg), "inspect", s(&design), s(&t), s(&j)]);
    assert_eq!(code(&out), 0);
    let report: FaultReport = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report.parameters.min_diff_pixels, 2);
    assert_eq!(report.parameters.subtract_mode, pcbfire::SubtractMode::Absolute);

    let out = run(&["--config", s(&cfg), "inspect", s(&design), s(&t), s(&j), "--min-diff-pixels", "1"]);
    assert_eq!(code(&out), 2);

    std::fs::write(&cfg, "bogus = 1\n").unwrap();
    assert_eq!(code(&run(&["--config", s(&cfg), "inspect", s(&design), s(&t), s(&j)])), 1);
}

#[test]
fn inject_writes_images_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let (img, dets) = small_board();
    let design = write_png(dir.path(), "board.png", &img);
    let j = write_dets(dir.path(), "board.json", img.dims(), &dets);
    let gen = dir.path().join("gen");
    let out = run(&["inject", s(&design), s(&j), "-k", "1", "--seed", "3", "--out", s(&gen)]);
    assert_eq!(code(&out), 0);
    let manifest = String::from_utf8(out.stdout).unwrap();
    assert_eq!(manifest.lines().count(), 4);

    let mut names: Vec<String> = std::fs::read_dir(&gen)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(
        names,
        vec![
            "board_missing1_0.png",
            "board_missing1_1.png",
            "board_missing1_2.png",
            "board_missing1_truth.json"
        ]
    );
    let truth: GroundTruth = serde_json::from_slice(&std::fs::read(gen.join("board_missing1_truth.json")).unwrap()).unwrap();
    assert_eq!(truth.k, 1);
    assert_eq!(truth.seed, 3);
    assert!(!truth.sampled);
    for (i, case) in truth.cases.iter().enumerate() {
        assert_eq!(case.erased, vec![dets[i]]);
        let img = decode_image(&std::fs::read(gen.join(&case.file)).unwrap()).unwrap();
        assert_eq!(img.dims(), (30, 10));
    }
}

#[test]
fn inject_rejects_bad_k_and_missing_patch() {
    let dir = tempfile::tempdir().unwrap();
    let (img, dets) = small_board();
    let design = write_png(dir.path(), "board.png", &img);
    let j = write_dets(dir.path(), "board.json", img.dims(), &dets);
    let gen = dir.path().join("gen");
    assert_eq!(code(&run(&["inject", s(&design), s(&j), "--k", "4", "--out", s(&gen)])), 1);
    assert_eq!(code(&run(&["inject", s(&design), s(&j), "--k", "0", "--out", s(&gen)])), 1);

    let full = RasterImage::filled(6, 6, 200).unwrap();
    let mut bright = full.clone();
    bright.set(0, 0, 0);
    let p = write_png(dir.path(), "bright.png", &bright);
    let j2 = write_dets(dir.path(), "bright.json", (6, 6), &[det(ComponentClass::Inductor, 2, 2, 3, 3, 1.0)]);
    let out = run(&["inject", s(&p), s(&j2), "--k", "1", "--out", s(&gen)]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("Inductor"));
}

#[test]
fn inject_with_patch_region() {
    let dir = tempfile::tempdir().unwrap();
    let (img, dets) = small_board();
    let design = write_png(dir.path(), "board.png", &img);
    let j = write_dets(dir.path(), "board.json", img.dims(), &dets);
    let gen = dir.path().join("gen");
    let out = run(&["inject", s(&design), s(&j), "--k", "3", "--patch-region", "22,0,8,10", "--out", s(&gen)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let erased = decode_image(&std::fs::read(gen.join("board_missing3_0.png")).unwrap()).unwrap();
    assert!(erased.data().iter().all(|&v| v == 5));
}

#[test]
fn eval_scores_table() {
    let dir = tempfile::tempdir().unwrap();
    let truth = vec![
        det(ComponentClass::Capacitor, 0, 0, 5, 5, 1.0),
        det(ComponentClass::Ic, 10, 0, 5, 5, 1.0),
    ];
    let t = write_dets(dir.path(), "truth.json", (20, 20), &truth);
    let out_json = dir.path().join("eval.json");
    let out = run(&["eval", s(&t), s(&t), "--out", s(&out_json)]);
    assert_eq!(code(&out), 0);
    let table = String::from_utf8(out.stdout).unwrap();
    assert_eq!(table.matches("100.00%").count(), 3, "{table}");
    let report: EvalReport = serde_json::from_slice(&std::fs::read(&out_json).unwrap()).unwrap();
    assert!(report.rows.iter().all(|r| r.accuracy == Some(100.0)));

    let empty = write_dets(dir.path(), "empty.json", (20, 20), &[]);
    let out = run(&["eval", s(&empty), s(&empty), "--out", s(&out_json)]);
    assert_eq!(code(&out), 0);
    let report: EvalReport = serde_json::from_slice(&std::fs::read(&out_json).unwrap()).unwrap();
    assert!(report.rows.is_empty());
    assert_eq!(report.aggregate.total, 0);

    let junk = dir.path().join("junk.json");
    std::fs::write(&junk, "{").unwrap();
    assert_eq!(code(&run(&["eval", s(&junk), s(&t)])), 1);
}

/// Boxes laid out on a grid so none overlap.
fn grid_box(i: usize) -> BBox {
    BBox::new((i % 40) as i32 * 10, (i / 40) as i32 * 10, 5, 5).unwrap()
}

#[test]
fn eval_reproduces_reference_accuracies() {
    let dir = tempfile::tempdir().unwrap();
    let counts = [
        (ComponentClass::Capacitor, 105, 4, 18),
        (ComponentClass::Resistor, 39, 3, 14),
        (ComponentClass::Inductor, 7, 3, 3),
        (ComponentClass::Ic, 139, 2, 4),
    ];
    let (mut pred, mut truth) = (Vec::new(), Vec::new());
    let mut slot = 0;
    for (class, tp, fp, fn_) in counts {
        for _ in 0..tp {
            let b = grid_box(slot);
            slot += 1;
            pred.push(Detection::new(class, b, 0.9).unwrap());
            truth.push(Detection::new(class, b, 1.0).unwrap());
        }
        for _ in 0..fp {
            pred.push(Detection::new(class, grid_box(slot), 0.9).unwrap());
            slot += 1;
        }
        for _ in 0..fn_ {
            truth.push(Detection::new(class, grid_box(slot), 1.0).unwrap());
            slot += 1;
        }
    }
    let p = write_dets(dir.path(), "pred.json", (400, 400), &pred);
    let t = write_dets(dir.path(), "truth.json", (400, 400), &truth);
    let out = run(&["eval", s(&p), s(&t)]);
    assert_eq!(code(&out), 0);
    let table = String::from_utf8(out.stdout).unwrap();
    for want in ["82.67%", "69.64%", "53.84%", "95.86%", "85.04%"] {
        assert!(table.contains(want), "{want} missing from\n{table}");
    }
}

#[test]
fn eval_accepts_inspect_reports() {
    let dir = tempfile::tempdir().unwrap();
    let (img, dets) = small_board();
    let design = write_png(dir.path(), "design.png", &img);
    let j = write_dets(dir.path(), "d.json", img.dims(), &dets);
    let mut test = img.clone();
    for y in 1..5 {
        for x in 1..5 {
            test.set(x, y, 5);
        }
    }
    let t = write_png(dir.path(), "test.png", &test);
    let report = dir.path().join("report.json");
    assert_eq!(code(&run(&["inspect", s(&design), s(&t), s(&j), "--out", s(&report)])), 2);
    let truth = write_dets(dir.path(), "truth.json", img.dims(), &dets[..1]);
    let eval_out = dir.path().join("eval.json");
    assert_eq!(code(&run(&["eval", s(&report), s(&truth), "--out", s(&eval_out)])), 0);
    let ev: EvalReport = serde_json::from_slice(&std::fs::read(&eval_out).unwrap()).unwrap();
    assert_eq!(ev.aggregate.tp, 1);
    assert_eq!(ev.aggregate.total, 1);
}

#[test]
fn nms_command() {
    let dir = tempfile::tempdir().unwrap();
    let one = [det(ComponentClass::Ic, 1, 1, 5, 5, 0.9)];
    let p = write_dets(dir.path(), "one.json", (20, 20), &one);
    let out = run(&["nms", s(&p)]);
    assert_eq!(code(&out), 0);
    let doc: pcbfire::DetectionsDocument = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc.detections, one.to_vec());

    let dup = [
        det(ComponentClass::Ic, 1, 1, 5, 5, 0.8),
        det(ComponentClass::Ic, 1, 1, 5, 5, 0.9),
    ];
    let p = write_dets(dir.path(), "dup.json", (20, 20), &dup);
    let out_path = dir.path().join("kept.json");
    assert_eq!(code(&run(&["nms", s(&p), "--out", s(&out_path)])), 0);
    let doc: pcbfire::DetectionsDocument = serde_json::from_slice(&std::fs::read(&out_path).unwrap()).unwrap();
    assert_eq!(doc.detections, vec![dup[1]]);

    let out = run(&["nms", s(&p), "--iou-threshold", "1.0"]);
    let doc: pcbfire::DetectionsDocument = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc.detections, vec![dup[1], dup[0]]);

    let txt = dir.path().join("dup.txt");
    std::fs::write(&txt, pcbfire::detect::to_darknet(&dup, (20, 20))).unwrap();
    assert_eq!(code(&run(&["nms", s(&txt)])), 1);
    let out = run(&["nms", s(&txt), "--image-size", "20x20"]);
    assert_eq!(code(&out), 0);
    let doc: pcbfire::DetectionsDocument = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc.detections.len(), 1);

    let junk = dir.path().join("junk.json");
    std::fs::write(&junk, "[1,2").unwrap();
    assert_eq!(code(&run(&["nms", s(&junk)])), 1);
}

#[test]
fn every_command_has_help() {
    for cmd in ["inspect", "inject", "eval", "nms"] {
        let out = run(&[cmd, "--help"]);
        assert_eq!(code(&out), 0);
        assert!(!out.stdout.is_empty());
    }
    let help = String::from_utf8(run(&["nms", "--help"]).stdout).unwrap();
    assert!(help.contains("1.0 keeps everything"));
}
