//! The three subcommands. Each returns the process exit status.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, Write};
use std::path::Path;
use std::time::Instant;

use log::{info, warn};
use serde::Serialize;
use urbent_core::characterize::{profile_entities, ProfileConfig, StopLists};
use urbent_core::geo::BoundingBox;
use urbent_core::ingest::{
    generate_synthetic, parse_photos, parse_pois, write_ground_truth, write_photos, write_pois, Dataset,
    IngestError, IngestReport, PhotoRecord, PoiRecord, SynthError, SyntheticSpec,
};
use urbent_core::refine::{iterative_cluster, RefineError, SilhouetteConfig};

use crate::config::{MineArgs, RunConfig, SynthArgs, ValidateArgs};
use crate::output::{feature_collection, iteration_summaries, Counts, RunSummary, Staging};
use crate::CliError;

fn ingest_err(path: &Path, e: IngestError) -> CliError {
    match e {
        IngestError::Io(e) => CliError::io(path, e),
        IngestError::Csv(e) if e.is_io_error() => CliError::io(path, e),
        other => CliError::Config(format!("{}: {other}", path.display())),
    }
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path).map(BufReader::new).map_err(|e| CliError::io(path, e))
}

fn read_photos(path: &Path, bbox: &BoundingBox) -> Result<(Vec<PhotoRecord>, IngestReport), CliError> {
    parse_photos(open(path)?, bbox).map_err(|e| ingest_err(path, e))
}

fn read_pois(path: &Path, bbox: &BoundingBox) -> Result<(Vec<PoiRecord>, IngestReport), CliError> {
    parse_pois(open(path)?, bbox).map_err(|e| ingest_err(path, e))
}

fn log_report(path: &Path, report: &IngestReport) {
    info!("{}: {} accepted, {} rejected", path.display(), report.accepted, report.rejected);
    if report.rejected > 0 {
        warn!("{}: rejected lines by reason {:?}", path.display(), report.reasons);
    }
}

/// Sort key for refinement paths: "0.10" after "0.9".
fn path_key(id: &str) -> Vec<usize> {
    id.split('.').map(|s| s.parse().unwrap_or(usize::MAX)).collect()
}

pub fn mine(args: &MineArgs) -> Result<i32, CliError> {
    let config = RunConfig::resolve(args)?;
    let mut stoplists = StopLists::builtin();
    for path in &config.stoplists {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        stoplists.add_user_list(&text);
    }
    let mut staging = Staging::new(&args.out)?;
    let mut timings: BTreeMap<&'static str, f64> = BTreeMap::new();
    let mut clock = Instant::now();
    let mut lap = |stage: &'static str, timings: &mut BTreeMap<&'static str, f64>| {
        let ms = clock.elapsed().as_secs_f64() * 1e3;
        info!("{stage}: {ms:.0} ms");
        timings.insert(stage, ms);
        clock = Instant::now();
    };

    let (photos, photo_report) = read_photos(&config.photos, &config.bbox)?;
    log_report(&config.photos, &photo_report);
    let (pois, poi_report) = match &config.pois {
        Some(path) => {
            let (pois, report) = read_pois(path, &config.bbox)?;
            log_report(path, &report);
            (pois, Some(report))
        }
        None => (Vec::new(), None),
    };
    let dataset = Dataset::new(photos, pois, config.bbox, None).map_err(|e| CliError::Config(e.to_string()))?;
    lap("ingest", &mut timings);

    let silhouette = SilhouetteConfig {
        sample_cap: config.sample_cap,
        seed: config.seed,
    };
    let refined = match iterative_cluster(&dataset, config.params, config.policy, silhouette) {
        Ok(r) => r,
        Err(RefineError::EmptyDataset) => {
            return Err(CliError::Config("no records were accepted inside the bounding box".into()))
        }
        Err(e) => return Err(CliError::Config(e.to_string())),
    };
    let fates = refined.tree.fates();
    info!(
        "{} entities, {} iterations, max depth {}",
        refined.entities.len(),
        refined.tree.iterations().len(),
        refined.tree.max_depth()
    );
    lap("refine", &mut timings);

    let mut entities: Vec<_> = refined.entities.iter().collect();
    entities.sort_by_key(|e| path_key(&e.id));
    let owned: Vec<_> = entities.iter().map(|&e| e.clone()).collect();
    let profile_config = ProfileConfig {
        top_k: config.top_k,
        tz_offset_minutes: config.tz_offset_minutes,
    };
    let profiles = profile_entities(&owned, &dataset, &stoplists, &profile_config);
    lap("characterize", &mut timings);

    let mut totals = photo_report.clone();
    if let Some(r) = &poi_report {
        totals.merge(r);
    }
    staging.stage_json("entities.geojson", &feature_collection(&entities, &profiles))?;
    staging.stage_json("profiles.json", &profiles)?;
    staging.stage_json("tree.json", &refined.tree)?;
    lap("write", &mut timings);
    let summary = RunSummary {
        tool: "urbent",
        version: env!("CARGO_PKG_VERSION"),
        counts: Counts {
            records_in: totals.accepted + totals.rejected,
            accepted: totals.accepted,
            rejected: totals.rejected,
            photos: photo_report,
            pois: poi_report,
            entities: entities.len(),
            fates,
        },
        iterations: iteration_summaries(&refined.tree),
        timings_ms: args.record_timings.then_some(timings),
        config,
    };
    staging.stage_json("summary.json", &summary)?;
    staging.commit()?;
    Ok(0)
}

pub fn synth(args: &SynthArgs) -> Result<i32, CliError> {
    let text = std::fs::read_to_string(&args.spec).map_err(|e| CliError::io(&args.spec, e))?;
    let bad_spec = |e: SynthError| CliError::Config(format!("{}: {e}", args.spec.display()));
    let spec = SyntheticSpec::from_toml_str(&text).map_err(bad_spec)?;
    let dataset = generate_synthetic(&spec, args.seed).map_err(bad_spec)?;
    info!("generated {} photos and {} POIs", dataset.photos.len(), dataset.pois.len());

    let mut staging = Staging::new(&args.out)?;
    let csv_io = |e: IngestError| std::io::Error::other(e.to_string());
    staging.stage("photos.csv", |w| write_photos(w, &dataset.photos).map_err(csv_io))?;
    staging.stage("pois.csv", |w| write_pois(w, &dataset.pois).map_err(csv_io))?;
    let truth = dataset.ground_truth.as_ref().expect("generator always labels");
    staging.stage("ground_truth.csv", |w| write_ground_truth(w, truth).map_err(csv_io))?;
    staging.commit()?;
    Ok(0)
}

#[derive(Debug, Serialize)]
struct ValidationReport {
    photos: IngestReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pois: Option<IngestReport>,
}

pub fn validate(args: &ValidateArgs, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let (_, photos) = read_photos(&args.photos, &args.bbox)?;
    let pois = match &args.pois {
        Some(path) => Some(read_pois(path, &args.bbox)?.1),
        None => None,
    };
    let rejected = photos.rejected + pois.as_ref().map_or(0, |r| r.rejected);
    let report = ValidationReport { photos, pois };
    serde_json::to_writer_pretty(&mut *stdout, &report)
        .map_err(std::io::Error::from)
        .and_then(|_| stdout.write_all(b"\n"))
        .map_err(|e| CliError::Io(format!("stdout: {e}")))?;
    Ok(if rejected == 0 { 0 } else { 1 })
}
