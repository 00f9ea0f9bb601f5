#![allow(dead_code)]

use std::path::PathBuf;

use dirand::tradeoff::{load_certificate, DualCertificate};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn fixture_bytes(name: &str) -> Vec<u8> {
    std::fs::read(fixture_path(name)).unwrap_or_else(|e| panic!("reading fixture {name}: {e}"))
}

pub fn fixture(name: &str) -> DualCertificate {
    load_certificate(&fixture_bytes(name)).unwrap_or_else(|e| panic!("loading fixture {name}: {e}"))
}

pub const FIXTURES: [&str; 4] = ["chsh_local.json", "2a_local.json", "2a_global.json", "3b_blind.json"];

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}
