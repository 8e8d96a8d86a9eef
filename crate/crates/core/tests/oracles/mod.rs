//! Brute-force reference implementations. Deliberately naive and written
//! without reusing any library code path they are compared against.
#![allow(dead_code)]

use std::collections::{HashMap, VecDeque};

pub type Pt = (f64, f64);

fn d2(a: Pt, b: Pt) -> f64 {
    let dx = a.0 - b.0;
    let dy = a.1 - b.1;
    dx * dx + dy * dy
}

/// Linear scan, boundary inclusive.
pub fn radius_scan(points: &[Pt], c: Pt, r: f64) -> Vec<usize> {
    (0..points.len()).filter(|&i| d2(points[i], c) <= r * r).collect()
}

/// Textbook DBSCAN: ascending seed scan, FIFO expansion, O(n) neighbourhood
/// scans, noise relabelled to border when first reached.
/// Returns `(labels, core)` with `None` for noise.
pub fn dbscan(points: &[Pt], eps: f64, min_pts: usize) -> (Vec<Option<usize>>, Vec<bool>) {
    #[derive(Clone, Copy, PartialEq)]
    enum L {
        Undef,
        Noise,
        C(usize),
    }
    let n = points.len();
    let nbrs = |i: usize| radius_scan(points, points[i], eps);
    let mut label = vec![L::Undef; n];
    let mut next = 0;
    for p in 0..n {
        if label[p] != L::Undef {
            continue;
        }
        let seeds = nbrs(p);
        if seeds.len() < min_pts {
            label[p] = L::Noise;
            continue;
        }
        let c = next;
        next += 1;
        label[p] = L::C(c);
        let mut queue: VecDeque<usize> = seeds.into_iter().filter(|&q| q != p).collect();
        while let Some(q) = queue.pop_front() {
            if label[q] == L::Noise {
                label[q] = L::C(c);
            }
            if label[q] != L::Undef {
                continue;
            }
            label[q] = L::C(c);
            let nq = nbrs(q);
            if nq.len() >= min_pts {
                queue.extend(nq);
            }
        }
    }
    let core = (0..n).map(|i| nbrs(i).len() >= min_pts).collect();
    let labels = label
        .into_iter()
        .map(|l| match l {
            L::C(c) => Some(c),
            _ => None,
        })
        .collect();
    (labels, core)
}

/// O(n^2) silhouette per point; `None` for noise.
pub fn silhouette(points: &[Pt], labels: &[Option<usize>]) -> Vec<Option<f64>> {
    let k = labels.iter().flatten().max().map_or(0, |m| m + 1);
    (0..points.len())
        .map(|i| {
            let own = labels[i]?;
            let mut sums = vec![0.0; k];
            let mut counts = vec![0usize; k];
            for j in 0..points.len() {
                if j == i {
                    continue;
                }
                if let Some(c) = labels[j] {
                    sums[c] += d2(points[i], points[j]).sqrt();
                    counts[c] += 1;
                }
            }
            if counts[own] == 0 {
                return Some(0.0);
            }
            let a = sums[own] / counts[own] as f64;
            let mut b = f64::INFINITY;
            for c in 0..k {
                if c != own && counts[c] > 0 {
                    b = b.min(sums[c] / counts[c] as f64);
                }
            }
            let m = a.max(b);
            Some(if m > 0.0 { (b - a) / m } else { 0.0 })
        })
        .collect()
}

fn comb2(n: usize) -> f64 {
    let n = n as f64;
    n * (n - 1.0) / 2.0
}

/// Adjusted Rand Index (Hubert & Arabie) from the contingency table.
pub fn adjusted_rand_index<A, B>(a: &[A], b: &[B]) -> f64
where
    A: std::hash::Hash + Eq + Clone,
    B: std::hash::Hash + Eq + Clone,
{
    assert_eq!(a.len(), b.len());
    let mut table: HashMap<(A, B), usize> = HashMap::new();
    let mut rows: HashMap<A, usize> = HashMap::new();
    let mut cols: HashMap<B, usize> = HashMap::new();
    for (x, y) in a.iter().zip(b) {
        *table.entry((x.clone(), y.clone())).or_default() += 1;
        *rows.entry(x.clone()).or_default() += 1;
        *cols.entry(y.clone()).or_default() += 1;
    }
    let index: f64 = table.values().map(|&n| comb2(n)).sum();
    let sa: f64 = rows.values().map(|&n| comb2(n)).sum();
    let sb: f64 = cols.values().map(|&n| comb2(n)).sum();
    let expected = sa * sb / comb2(a.len());
    let max = (sa + sb) / 2.0;
    if (max - expected).abs() < f64::EPSILON {
        return 1.0;
    }
    (index - expected) / (max - expected)
}

/// tf-idf by enumeration over raw tag lists: documents are `Vec<&str>`
/// occurrences, df counted by scanning every document for every tag.
/// Returns per document every positive `(tag, score)`, unsorted.
pub fn tfidf(docs: &[Vec<&str>]) -> Vec<Vec<(String, f64)>> {
    let n = docs.len() as f64;
    docs.iter()
        .map(|doc| {
            let mut distinct: Vec<&str> = doc.clone();
            distinct.sort();
            distinct.dedup();
            distinct
                .into_iter()
                .map(|t| {
                    let tf = doc.iter().filter(|&&x| x == t).count() as f64 / doc.len() as f64;
                    let df = docs.iter().filter(|d| d.contains(&t)).count() as f64;
                    (t.to_owned(), tf * (n / df).ln())
                })
                .filter(|(_, s)| *s > 0.0)
                .collect()
        })
        .collect()
}

/// Point inside or on a CCW convex polygon (open ring), by the sign of every
/// edge cross product, with a relative tolerance for "on the edge".
pub fn in_convex_polygon(hull: &[Pt], p: Pt) -> bool {
    if hull.len() == 1 {
        return hull[0] == p;
    }
    let scale = hull.iter().map(|q| q.0.abs().max(q.1.abs())).fold(1.0, f64::max);
    for i in 0..hull.len() {
        let a = hull[i];
        let b = hull[(i + 1) % hull.len()];
        let cross = (b.0 - a.0) * (p.1 - a.1) - (b.1 - a.1) * (p.0 - a.0);
        if cross < -1e-9 * scale * scale {
            return false;
        }
    }
    true
}

/// `(year, day of week Monday = 0, hour)` of a UTC timestamp shifted by a
/// fixed offset, by integer calendar arithmetic (Hinnant's civil_from_days).
pub fn local_calendar(secs: i64, offset_minutes: i32) -> (i32, usize, usize) {
    let local = secs + offset_minutes as i64 * 60;
    let days = local.div_euclid(86_400);
    let hour = (local.rem_euclid(86_400) / 3600) as usize;
    // 1970-01-01 was a Thursday
    let dow = (days + 3).rem_euclid(7) as usize;
    let z = days + 719_468;
    let era = z.div_euclid(146_097);
    let doe = z - era * 146_097;
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let month = if mp < 10 { mp + 3 } else { mp - 9 };
    let year = yoe + era * 400 + if month <= 2 { 1 } else { 0 };
    (year as i32, dow, hour)
}
