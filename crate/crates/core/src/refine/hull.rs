//! Andrew's monotone-chain convex hull.

use std::cmp::Ordering;

use thiserror::Error;

use crate::geo::PlanarPoint;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HullError {
    #[error("convex hull of an empty point set")]
    Empty,
}

#[inline]
fn cross<T: Scalar>(o: PlanarPoint<T>, a: PlanarPoint<T>, b: PlanarPoint<T>) -> T {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Hull vertex indices in counter-clockwise order, starting at the
/// lowest-x (then lowest-y) point. The ring is open (first vertex not
/// repeated). Collinear vertices are dropped. One distinct point yields one
/// index; collinear input yields the two extremes.
pub fn convex_hull_indices<T: Scalar>(points: &[PlanarPoint<T>]) -> Result<Vec<usize>, HullError> {
    if points.is_empty() {
        return Err(HullError::Empty);
    }
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| {
        let (a, b) = (points[i], points[j]);
        a.x.partial_cmp(&b.x)
            .unwrap_or(Ordering::Equal)
            .then(a.y.partial_cmp(&b.y).unwrap_or(Ordering::Equal))
            .then(i.cmp(&j))
    });
    order.dedup_by(|a, b| points[*a] == points[*b]);
    if order.len() < 3 {
        return Ok(order);
    }

    let mut hull: Vec<usize> = Vec::with_capacity(2 * order.len());
    for &i in &order {
        while hull.len() >= 2
            && cross(points[hull[hull.len() - 2]], points[hull[hull.len() - 1]], points[i]) <= T::zero()
        {
            hull.pop();
        }
        hull.push(i);
    }
    let lower_len = hull.len() + 1;
    for &i in order.iter().rev().skip(1) {
        while hull.len() >= lower_len
            && cross(points[hull[hull.len() - 2]], points[hull[hull.len() - 1]], points[i]) <= T::zero()
        {
            hull.pop();
        }
        hull.push(i);
    }
    hull.pop();
    Ok(hull)
}

pub fn convex_hull<T: Scalar>(points: &[PlanarPoint<T>]) -> Result<Vec<PlanarPoint<T>>, HullError> {
    Ok(convex_hull_indices(points)?
        .into_iter()
        .map(|i| points[i])
        .collect())
}
