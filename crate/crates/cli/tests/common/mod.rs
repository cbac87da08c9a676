#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pcbfire::synth::{synthetic_board, BoardSpec, SyntheticBoard};
use pcbfire::{encode_image, Detection, DetectionsDocument, ImageFormat, RasterImage};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pcbfire"))
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn pcbfire")
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

pub fn board(seed: u64) -> SyntheticBoard {
    synthetic_board(&mut ChaCha8Rng::seed_from_u64(seed), &BoardSpec::default())
}

pub fn write_png(dir: &Path, name: &str, img: &RasterImage) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, encode_image(img, ImageFormat::Png).unwrap()).unwrap();
    p
}

pub fn write_dets(dir: &Path, name: &str, dims: (u32, u32), dets: &[Detection]) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, DetectionsDocument::new(dims, dets.to_vec()).to_json()).unwrap();
    p
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}
