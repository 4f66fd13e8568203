//! Replays the checked-in fuzz corpus through the same parser entry points
//! the fuzz targets call: every seed must parse, and no prefix or single-byte
//! corruption of a seed may panic.

use std::fs;
use std::path::PathBuf;

use kkmkit::input;

type Parser = fn(&[u8]) -> Result<(), input::InputError>;

fn targets() -> Vec<(&'static str, Parser)> {
    vec![
        ("polytope", |b| input::parse_polytope(b).map(drop)),
        ("point", |b| input::parse_point(b).map(drop)),
        ("family", |b| input::parse_family(b).map(drop)),
        ("kkm", |b| input::parse_kkm(b).map(drop)),
        ("game", |b| input::parse_game(b).map(drop)),
        ("vi", |b| input::parse_vi(b).map(drop)),
        ("fixed_point", |b| input::parse_fixed_point(b).map(drop)),
        ("alternative", |b| input::parse_alternative(b).map(drop)),
        ("minimize", |b| input::parse_minimize(b).map(drop)),
        ("config", |b| input::parse_config(b).map(drop)),
    ]
}

fn seeds(target: &str) -> Vec<(PathBuf, Vec<u8>)> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fuzz/corpus")
        .join(target);
    let mut out: Vec<_> = fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().map_or(false, |x| x == "json"))
        .map(|p| {
            let bytes = fs::read(&p).unwrap();
            (p, bytes)
        })
        .collect();
    out.sort();
    out
}

#[test]
fn every_seed_parses() {
    for (target, parse) in targets() {
        let seeds = seeds(target);
        assert!(!seeds.is_empty(), "no seeds for {target}");
        for (path, bytes) in seeds {
            if let Err(e) = parse(&bytes) {
                panic!("{}: {e}", path.display());
            }
        }
    }
}

#[test]
fn mutated_seeds_do_not_panic() {
    const NOISE: &[u8] = b"-0e]}[{\",:1\x00\xff";
    for (target, parse) in targets() {
        for (_, bytes) in seeds(target) {
            for cut in 0..bytes.len() {
                let _ = parse(&bytes[..cut]);
            }
            for i in 0..bytes.len() {
                for &c in NOISE {
                    let mut m = bytes.clone();
                    m[i] = c;
                    let _ = parse(&m);
                }
            }
        }
    }
}
