//! Uniform-grid index for exact fixed-radius neighbour queries.
//!
//! With `cell_size = eps` a DBSCAN neighbourhood touches a 3x3 block of cells.
//! Points are stored cell-contiguous (CSR layout) so the inner distance loop
//! walks a flat slice.

use std::collections::HashMap;

use thiserror::Error;

use crate::geo::PlanarPoint;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpatialError {
    #[error("cell size must be positive and finite, got {0}")]
    InvalidCellSize(f64),
    #[error("query radius must be positive and finite, got {0}")]
    InvalidRadius(f64),
    #[error("point {0} has a non-finite coordinate")]
    NonFinitePoint(usize),
}

pub type CellKey = (i64, i64);

#[derive(Debug, Clone)]
pub struct GridIndex<T> {
    cell_size: T,
    origin: PlanarPoint<T>,
    /// cell -> range into `ids`/`coords`
    cells: HashMap<CellKey, (usize, usize)>,
    ids: Vec<usize>,
    coords: Vec<PlanarPoint<T>>,
    points: Vec<PlanarPoint<T>>,
}

impl<T: Scalar> GridIndex<T> {
    /// Builds the index in expected O(n). Point ids are slice positions.
    pub fn build(points: &[PlanarPoint<T>], cell_size: T) -> Result<Self, SpatialError> {
        if !(cell_size > T::zero()) || !cell_size.is_finite() {
            return Err(SpatialError::InvalidCellSize(cell_size.as_f64()));
        }
        if let Some(bad) = points
            .iter()
            .position(|p| !p.x.is_finite() || !p.y.is_finite())
        {
            return Err(SpatialError::NonFinitePoint(bad));
        }

        let origin = points
            .iter()
            .fold(None, |acc: Option<PlanarPoint<T>>, p| match acc {
                None => Some(*p),
                Some(o) => Some(PlanarPoint::new(o.x.min(p.x), o.y.min(p.y))),
            })
            .unwrap_or_default();

        let mut index = Self {
            cell_size,
            origin,
            cells: HashMap::new(),
            ids: Vec::with_capacity(points.len()),
            coords: Vec::with_capacity(points.len()),
            points: points.to_vec(),
        };

        // Counting sort by cell: slot per distinct cell in first-seen order.
        let mut slot_of: HashMap<CellKey, usize> = HashMap::new();
        let mut keys = Vec::new();
        let mut counts: Vec<usize> = Vec::new();
        let point_slots: Vec<usize> = points
            .iter()
            .map(|p| {
                let key = index.cell_of(*p);
                let slot = *slot_of.entry(key).or_insert_with(|| {
                    keys.push(key);
                    counts.push(0);
                    counts.len() - 1
                });
                counts[slot] += 1;
                slot
            })
            .collect();

        let mut starts = Vec::with_capacity(counts.len());
        let mut acc = 0;
        for (slot, &c) in counts.iter().enumerate() {
            starts.push(acc);
            index.cells.insert(keys[slot], (acc, acc + c));
            acc += c;
        }
        index.ids = vec![0; points.len()];
        index.coords = vec![PlanarPoint::default(); points.len()];
        let mut cursor = starts;
        for (id, &slot) in point_slots.iter().enumerate() {
            let at = cursor[slot];
            index.ids[at] = id;
            index.coords[at] = points[id];
            cursor[slot] += 1;
        }
        Ok(index)
    }

    pub fn cell_size(&self) -> T {
        self.cell_size
    }

    pub fn origin(&self) -> PlanarPoint<T> {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[PlanarPoint<T>] {
        &self.points
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    /// Cell coordinates of a position.
    pub fn cell_of(&self, p: PlanarPoint<T>) -> CellKey {
        (self.axis_cell(p.x - self.origin.x), self.axis_cell(p.y - self.origin.y))
    }

    /// Ids stored in one cell, ascending.
    pub fn cell_members(&self, key: CellKey) -> &[usize] {
        self.cells
            .get(&key)
            .map_or(&[][..], |&(lo, hi)| &self.ids[lo..hi])
    }

    /// Iterator over `(cell, population)`.
    pub fn cell_populations(&self) -> impl Iterator<Item = (CellKey, usize)> + '_ {
        self.cells.iter().map(|(&k, &(lo, hi))| (k, hi - lo))
    }

    fn axis_cell(&self, offset: T) -> i64 {
        (offset / self.cell_size)
            .floor()
            .to_i64()
            .unwrap_or(if offset < T::zero() { i64::MIN } else { i64::MAX })
    }

    /// Exact ids within `r` of `center` (boundary inclusive), ascending.
    pub fn radius_query(&self, center: PlanarPoint<T>, r: T) -> Result<Vec<usize>, SpatialError> {
        if !(r > T::zero()) || !r.is_finite() {
            return Err(SpatialError::InvalidRadius(r.as_f64()));
        }
        let mut out = Vec::new();
        self.for_each_within(center, r, |id| out.push(id));
        out.sort_unstable();
        Ok(out)
    }

    /// Calls `f` for every id within `r` of `center`, in storage order.
    /// `r` is assumed positive; no validation.
    #[inline]
    pub fn for_each_within(&self, center: PlanarPoint<T>, r: T, mut f: impl FnMut(usize)) {
        let r2 = r * r;
        self.scan_cells(center, r, |lo, hi| {
            for (k, p) in self.coords[lo..hi].iter().enumerate() {
                if p.distance_sq(center) <= r2 {
                    f(self.ids[lo + k]);
                }
            }
            true
        });
    }

    /// Number of points within `r`, stopping early once `cap` is reached.
    pub fn count_within(&self, center: PlanarPoint<T>, r: T, cap: usize) -> usize {
        let r2 = r * r;
        let mut n = 0;
        self.scan_cells(center, r, |lo, hi| {
            n += self.coords[lo..hi]
                .iter()
                .filter(|p| p.distance_sq(center) <= r2)
                .count();
            n < cap
        });
        n
    }

    /// Visits the storage ranges of every cell intersecting the square
    /// `[center - r, center + r]`. The visitor returns `false` to stop.
    fn scan_cells(&self, center: PlanarPoint<T>, r: T, mut visit: impl FnMut(usize, usize) -> bool) {
        if self.cells.is_empty() {
            return;
        }
        // Widen by a few ulps so rounding in `distance_sq` can never admit a
        // point whose cell lies outside the scanned block.
        let pad = r * (T::one() + T::epsilon() * T::of(64.0));
        let (x0, y0) = self.cell_of(PlanarPoint::new(center.x - pad, center.y - pad));
        let (x1, y1) = self.cell_of(PlanarPoint::new(center.x + pad, center.y + pad));
        let span = (x1 as i128 - x0 as i128 + 1) * (y1 as i128 - y0 as i128 + 1);
        if span > self.cells.len() as i128 {
            for (&(cx, cy), &(lo, hi)) in &self.cells {
                if (x0..=x1).contains(&cx) && (y0..=y1).contains(&cy) && !visit(lo, hi) {
                    return;
                }
            }
            return;
        }
        for cx in x0..=x1 {
            for cy in y0..=y1 {
                if let Some(&(lo, hi)) = self.cells.get(&(cx, cy)) {
                    if !visit(lo, hi) {
                        return;
                    }
                }
            }
        }
    }
}
