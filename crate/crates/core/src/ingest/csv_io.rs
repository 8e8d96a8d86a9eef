use std::collections::{BTreeMap, HashSet};
use std::io::{Read, Write};

use chrono::{DateTime, SecondsFormat, TimeZone, Utc};
use csv::{ByteRecord, ReaderBuilder, WriterBuilder};

use super::{normalize_tag, GroundTruth, IngestError, IngestReport, PhotoRecord, PoiCategory, PoiRecord};
use crate::geo::{bbox_contains, BoundingBox, GeoPoint};

pub const PHOTO_HEADER: [&str; 6] = ["id", "lat", "lon", "taken_at", "user_id", "tags"];
pub const POI_HEADER: [&str; 4] = ["id", "lat", "lon", "category"];

const BAD_FIELD_COUNT: &str = "bad_field_count";
const BAD_ENCODING: &str = "bad_encoding";
const EMPTY_ID: &str = "empty_id";
const BAD_COORDINATE: &str = "bad_coordinate";
const OUT_OF_BBOX: &str = "out_of_bbox";
const BAD_TIMESTAMP: &str = "bad_timestamp";
const DUPLICATE_ID: &str = "duplicate_id";
const MALFORMED_LINE: &str = "malformed_line";

/// Earliest accepted photo timestamp, 1990-01-01T00:00:00Z.
const MIN_TIMESTAMP: i64 = 631_152_000;

/// Parses an ISO-8601 / RFC 3339 timestamp with a zero UTC offset.
pub fn parse_timestamp(raw: &str) -> Option<i64> {
    let dt = DateTime::parse_from_rfc3339(raw.trim()).ok()?;
    (dt.offset().local_minus_utc() == 0).then(|| dt.timestamp())
}

pub fn format_timestamp(secs: i64) -> String {
    Utc.timestamp_opt(secs, 0)
        .single()
        .map(|d| d.to_rfc3339_opts(SecondsFormat::Secs, true))
        .unwrap_or_default()
}

/// Iterates the data records of a headed CSV source, feeding each decoded
/// record (or a rejection) to `on_record`.
fn read_records<R: Read>(
    source: R,
    header: &[&str],
    report: &mut IngestReport,
    mut on_record: impl FnMut(&[&str], &mut IngestReport),
) -> Result<(), IngestError> {
    let mut reader = ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(source);
    let mut record = ByteRecord::new();

    let expected = header.join(",");
    let got_header = reader.read_byte_record(&mut record).map_err(fatal)?;
    let found: Vec<String> = record
        .iter()
        .map(|f| String::from_utf8_lossy(f).trim().trim_start_matches('\u{feff}').to_owned())
        .collect();
    if !got_header || found.iter().map(String::as_str).ne(header.iter().copied()) {
        return Err(IngestError::MissingHeader {
            expected,
            found: found.join(","),
        });
    }

    loop {
        match reader.read_byte_record(&mut record) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) if matches!(e.kind(), csv::ErrorKind::Io(_)) => return Err(fatal(e)),
            Err(_) => {
                report.reject(MALFORMED_LINE);
                continue;
            }
        }
        if record.len() != header.len() {
            report.reject(BAD_FIELD_COUNT);
            continue;
        }
        let mut fields: Vec<&str> = Vec::with_capacity(header.len());
        let mut utf8_ok = true;
        for f in record.iter() {
            match std::str::from_utf8(f) {
                Ok(s) => fields.push(s),
                Err(_) => {
                    utf8_ok = false;
                    break;
                }
            }
        }
        if !utf8_ok {
            report.reject(BAD_ENCODING);
            continue;
        }
        on_record(&fields, report);
    }
    Ok(())
}

fn fatal(e: csv::Error) -> IngestError {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => IngestError::Io(io),
            _ => unreachable!(),
        }
    } else {
        IngestError::Csv(e)
    }
}

fn parse_point(lat: &str, lon: &str) -> Option<GeoPoint> {
    let lat = lat.trim().parse::<f64>().ok()?;
    let lon = lon.trim().parse::<f64>().ok()?;
    GeoPoint::new(lat, lon).ok()
}

/// Validates the shared `id,lat,lon` prefix; returns the reason on failure.
fn check_located(id: &str, lat: &str, lon: &str, bbox: &BoundingBox) -> Result<GeoPoint, &'static str> {
    if id.trim().is_empty() {
        return Err(EMPTY_ID);
    }
    let point = parse_point(lat, lon).ok_or(BAD_COORDINATE)?;
    if !bbox_contains(bbox, point) {
        return Err(OUT_OF_BBOX);
    }
    Ok(point)
}

/// Reads a photo CSV (`id,lat,lon,taken_at,user_id,tags`). Bad lines are
/// counted in the report; only an unreadable source or a missing header is
/// fatal. Duplicate ids keep the first accepted occurrence.
pub fn parse_photos<R: Read>(
    source: R,
    bbox: &BoundingBox,
) -> Result<(Vec<PhotoRecord>, IngestReport), IngestError> {
    let now = Utc::now().timestamp();
    let mut report = IngestReport::default();
    let mut photos = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();
    read_records(source, &PHOTO_HEADER, &mut report, |f, report| {
        let point = match check_located(f[0], f[1], f[2], bbox) {
            Ok(p) => p,
            Err(reason) => return report.reject(reason),
        };
        let taken_at = match parse_timestamp(f[3]) {
            Some(t) if (MIN_TIMESTAMP..=now).contains(&t) => t,
            _ => return report.reject(BAD_TIMESTAMP),
        };
        let id = f[0].trim();
        if seen.contains(id) {
            return report.reject(DUPLICATE_ID);
        }
        seen.insert(id.to_owned());
        let tags = f[5].split(';').filter_map(normalize_tag).collect();
        photos.push(PhotoRecord {
            id: id.to_owned(),
            point,
            taken_at,
            tags,
            user_id: f[4].trim().to_owned(),
        });
        report.accepted += 1;
    })?;
    Ok((photos, report))
}

/// Reads a POI CSV (`id,lat,lon,category`). Unknown categories become
/// [`PoiCategory::Other`] and are counted, not rejected.
pub fn parse_pois<R: Read>(
    source: R,
    bbox: &BoundingBox,
) -> Result<(Vec<PoiRecord>, IngestReport), IngestError> {
    let mut report = IngestReport::default();
    let mut pois = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();
    read_records(source, &POI_HEADER, &mut report, |f, report| {
        let point = match check_located(f[0], f[1], f[2], bbox) {
            Ok(p) => p,
            Err(reason) => return report.reject(reason),
        };
        let id = f[0].trim();
        if seen.contains(id) {
            return report.reject(DUPLICATE_ID);
        }
        seen.insert(id.to_owned());
        let category = PoiCategory::from_label(f[3]).unwrap_or_else(|| {
            report.unknown_category += 1;
            PoiCategory::Other
        });
        pois.push(PoiRecord {
            id: id.to_owned(),
            point,
            category,
        });
        report.accepted += 1;
    })?;
    Ok((pois, report))
}

pub fn write_photos<W: Write>(sink: W, photos: &[PhotoRecord]) -> Result<(), IngestError> {
    let mut w = WriterBuilder::new().from_writer(sink);
    w.write_record(PHOTO_HEADER)?;
    for p in photos {
        w.write_record([
            p.id.as_str(),
            &p.point.lat.to_string(),
            &p.point.lon.to_string(),
            &format_timestamp(p.taken_at),
            &p.user_id,
            &p.tags.join(";"),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_pois<W: Write>(sink: W, pois: &[PoiRecord]) -> Result<(), IngestError> {
    let mut w = WriterBuilder::new().from_writer(sink);
    w.write_record(POI_HEADER)?;
    for p in pois {
        w.write_record([
            p.id.as_str(),
            &p.point.lat.to_string(),
            &p.point.lon.to_string(),
            p.category.label(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `id,label` with label a blob index or `noise`.
pub fn write_ground_truth<W: Write>(
    sink: W,
    truth: &BTreeMap<String, GroundTruth>,
) -> Result<(), IngestError> {
    let mut w = WriterBuilder::new().from_writer(sink);
    w.write_record(["id", "label"])?;
    for (id, label) in truth {
        w.write_record([id.as_str(), &label.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
