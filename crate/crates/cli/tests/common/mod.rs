//! Helpers for driving the built binary against synthetic fixtures.
#![allow(dead_code)]

#[path = "../../../core/tests/fixtures/mod.rs"]
pub mod fixtures;

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use urbent_core::geo::BoundingBox;
use urbent_core::ingest::SyntheticSpec;

pub fn urbent() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_urbent"));
    c.env_remove("URBENT_LOG");
    c
}

pub fn run(args: &[&str]) -> Output {
    urbent().args(args).output().expect("spawn urbent")
}

pub fn p(path: &Path) -> &str {
    path.to_str().expect("utf-8 temp path")
}

pub fn bbox_flag(b: &BoundingBox) -> String {
    format!("{},{},{},{}", b.min_lat, b.min_lon, b.max_lat, b.max_lon)
}

/// Writes `spec` as TOML and runs `urbent synth`; returns the data dir.
pub fn synth(dir: &Path, spec: &SyntheticSpec, seed: u64) -> PathBuf {
    let spec_path = dir.join("spec.toml");
    fs::write(&spec_path, toml::to_string(spec).expect("spec serializes")).unwrap();
    let data = dir.join("data");
    let out = run(&["synth", "--spec", p(&spec_path), "--seed", &seed.to_string(), "--out", p(&data)]);
    assert!(out.status.success(), "synth failed: {}", String::from_utf8_lossy(&out.stderr));
    data
}

pub fn mine(data: &Path, bbox: &BoundingBox, out: &Path, extra: &[&str]) -> Output {
    let photos = data.join("photos.csv");
    let pois = data.join("pois.csv");
    let bbox = bbox_flag(bbox);
    let mut args = vec!["mine", "--photos", p(&photos), "--pois", p(&pois), "--bbox", &bbox, "--out", p(out)];
    args.extend_from_slice(extra);
    run(&args)
}

pub fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display())))
        .unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

pub const OUTPUTS: [&str; 4] = ["entities.geojson", "profiles.json", "tree.json", "summary.json"];

pub fn output_bytes(dir: &Path) -> Vec<Vec<u8>> {
    OUTPUTS.iter().map(|f| fs::read(dir.join(f)).unwrap()).collect()
}

fn as_usize(v: &Value) -> usize {
    v.as_u64().expect("count") as usize
}

/// Conservation and well-formedness of a mining run's outputs. Returns the
/// first violation found.
pub fn check_outputs(dir: &Path, bbox: &BoundingBox) -> Result<usize, String> {
    let geo = json(&dir.join("entities.geojson"));
    let profiles = json(&dir.join("profiles.json"));
    let summary = json(&dir.join("summary.json"));
    let features = geo["features"].as_array().ok_or("features missing")?;
    let profiles = profiles.as_array().ok_or("profiles not an array")?;
    if geo["type"] != "FeatureCollection" {
        return Err("not a FeatureCollection".into());
    }

    let feature_ids: Vec<&str> = features.iter().map(|f| f["id"].as_str().unwrap()).collect();
    let profile_ids: Vec<&str> = profiles.iter().map(|p| p["entity_id"].as_str().unwrap()).collect();
    if feature_ids != profile_ids {
        return Err(format!("join mismatch: {feature_ids:?} vs {profile_ids:?}"));
    }
    if feature_ids.iter().collect::<BTreeSet<_>>().len() != feature_ids.len() {
        return Err("duplicate entity ids".into());
    }

    let mut in_leaves = 0;
    for (f, prof) in features.iter().zip(profiles) {
        let id = f["id"].as_str().unwrap();
        let g = &f["geometry"];
        let coords: Vec<&Value> = match g["type"].as_str() {
            Some("Polygon") => {
                let ring = g["coordinates"][0].as_array().ok_or("ring")?;
                if ring.len() < 4 || ring.first() != ring.last() {
                    return Err(format!("{id}: polygon ring not closed"));
                }
                ring.iter().collect()
            }
            Some("LineString") => g["coordinates"].as_array().unwrap().iter().collect(),
            Some("Point") => vec![&g["coordinates"]],
            other => return Err(format!("{id}: unexpected geometry {other:?}")),
        };
        for c in coords {
            let (lon, lat) = (c[0].as_f64().unwrap(), c[1].as_f64().unwrap());
            if !(bbox.min_lon..=bbox.max_lon).contains(&lon) || !(bbox.min_lat..=bbox.max_lat).contains(&lat) {
                return Err(format!("{id}: vertex [{lon}, {lat}] outside bbox or not [lon, lat]"));
            }
        }

        let props = &f["properties"];
        let photos = as_usize(&props["photo_count"]);
        let pois = as_usize(&props["poi_count"]);
        in_leaves += photos + pois;
        if as_usize(&prof["photo_count"]) != photos || as_usize(&prof["poi_count"]) != pois {
            return Err(format!("{id}: profile counts differ from feature"));
        }
        let sum = |v: &Value| -> usize { v.as_array().unwrap().iter().map(as_usize).sum() };
        if sum(&prof["dow_hist"]) != photos || sum(&prof["hod_hist"]) != photos {
            return Err(format!("{id}: histogram sums differ from photo count"));
        }
        let cats: usize = prof["category_counts"].as_object().unwrap().values().map(as_usize).sum();
        if cats != pois {
            return Err(format!("{id}: category sum {cats} != {pois}"));
        }
        let top: Vec<&Value> = prof["top_tags"].as_array().unwrap().iter().map(|t| &t["tag"]).collect();
        let top3: Vec<&Value> = props["top_tags"].as_array().unwrap().iter().collect();
        if top3.as_slice() != &top[..top.len().min(3)] {
            return Err(format!("{id}: feature top tags are not the profile's first three"));
        }
    }

    let fates = &summary["counts"]["fates"];
    let root = as_usize(&fates["root_non_noise"]);
    let accounted =
        as_usize(&fates["in_leaves"]) + as_usize(&fates["discarded_small"]) + as_usize(&fates["noise_in_subruns"]);
    if root != accounted {
        return Err(format!("fates do not balance: {root} vs {accounted}"));
    }
    if as_usize(&fates["in_leaves"]) != in_leaves {
        return Err("leaf member total differs from fates".into());
    }
    if as_usize(&summary["counts"]["entities"]) != features.len() {
        return Err("summary entity count differs".into());
    }
    Ok(features.len())
}
