//! Test corpus of level problems.
//!
//! One entry per line, `name | map | lambda | r or - | class`, with `#`
//! comments. A line `random_blaschke seed=S count=N` expands to `N` random
//! Blaschke problems drawn from a ChaCha stream seeded with `S`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::holomap::{parse, HoloMap};
use crate::levelset::LevelProblem;

const DEFAULT: &str = include_str!("../corpus/default.txt");

/// Level values used for unscaled random members.
pub const RANDOM_LAMBDAS: [f64; 4] = [1.0, 1.1, 1.5, 3.0];

/// The equality class a map belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MapClass {
    /// A disc automorphism.
    Aut,
    /// A unimodular constant.
    Unimodular,
    General,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusEntry {
    pub name: String,
    pub source: String,
    pub map: HoloMap,
    pub lambda: f64,
    pub r: Option<f64>,
    pub class: MapClass,
}

impl CorpusEntry {
    pub fn problem(&self) -> Result<LevelProblem> {
        match self.r {
            Some(r) => LevelProblem::scaled(self.map.clone(), r),
            None => LevelProblem::new(self.map.clone(), self.lambda),
        }
    }
}

/// The committed 50-map corpus.
pub fn default_corpus() -> Vec<CorpusEntry> {
    parse_corpus(DEFAULT).expect("committed corpus parses")
}

pub fn parse_corpus(text: &str) -> Result<Vec<CorpusEntry>> {
    let mut out = Vec::new();
    let mut offset = 0;
    for line in text.lines() {
        let start = offset;
        offset += line.len() + 1;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let bad = |message: &str| Error::Parse { offset: start, message: message.to_string() };
        if let Some(args) = body.strip_prefix("random_blaschke") {
            let mut seed = None;
            let mut count = None;
            for kv in args.split_whitespace() {
                match kv.split_once('=') {
                    Some(("seed", v)) => seed = v.parse().ok(),
                    Some(("count", v)) => count = v.parse().ok(),
                    _ => return Err(bad("expected seed=… count=…")),
                }
            }
            let (seed, count) = seed.zip(count).ok_or_else(|| bad("expected seed=… count=…"))?;
            out.extend(random_blaschke_corpus(seed, count));
            continue;
        }
        let fields: Vec<&str> = body.split('|').map(str::trim).collect();
        if fields.len() != 5 {
            return Err(bad("expected five '|'-separated fields"));
        }
        let map = parse(fields[1]).map_err(|e| match e {
            Error::Parse { offset, message } => Error::Parse {
                offset: start + line.find(fields[1]).unwrap_or(0) + offset,
                message,
            },
            other => other,
        })?;
        let lambda = fields[2].parse().map_err(|_| bad("bad lambda"))?;
        let r = match fields[3] {
            "-" => None,
            v => Some(v.parse().map_err(|_| bad("bad r"))?),
        };
        let class = match fields[4] {
            "aut" => MapClass::Aut,
            "unimodular" => MapClass::Unimodular,
            "general" => MapClass::General,
            _ => return Err(bad("class must be aut, unimodular or general")),
        };
        out.push(CorpusEntry {
            name: fields[0].to_string(),
            source: fields[1].to_string(),
            map,
            lambda,
            r,
            class,
        });
    }
    Ok(out)
}

/// Random Blaschke products of degree 1 to 3 with zeros of modulus in
/// `[0.2, 0.85]`. Even-numbered members are scaled problems `Ω(rB)` with
/// `r ∈ [0.2, 0.95]`; odd-numbered ones are level problems for `sB` with
/// `s ∈ [0.5, 0.95]` and `λ` cycling through [`RANDOM_LAMBDAS`].
pub fn random_blaschke_corpus(seed: u64, count: usize) -> Vec<CorpusEntry> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let degree = rng.gen_range(1..=3);
            let zeros: Vec<(f64, f64)> = (0..degree)
                .map(|_| {
                    let z = Complex64::from_polar(rng.gen_range(0.2..=0.85), rng.gen_range(-PI..PI));
                    (z.re, z.im)
                })
                .collect();
            let rot = rng.gen_range(-PI..PI);
            let list: Vec<String> = zeros.iter().map(|(re, im)| format!("({re:?}, {im:?}, 1)")).collect();
            let blaschke = format!("blaschke([{}]; {:?}, {:?})", list.join(", "), rot.cos(), rot.sin());
            let (source, lambda, r) = if i % 2 == 0 {
                (blaschke, 1.0, Some(rng.gen_range(0.2..=0.95)))
            } else {
                let s: f64 = rng.gen_range(0.5..=0.95);
                (format!("smul({s:?}, 0, {blaschke})"), RANDOM_LAMBDAS[(i / 2) % 4], None)
            };
            let map = parse(&source).expect("generated source parses");
            CorpusEntry { name: format!("random_{seed}_{i}"), source, map, lambda, r, class: MapClass::General }
        })
        .collect()
}
