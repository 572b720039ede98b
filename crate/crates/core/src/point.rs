//! Decision-space points and canonically ordered point sets.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::tol::Tolerance;

/// A dense decision vector indexed by the problem's variable order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(pub Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Point(coords)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    /// Lexicographic comparison by coordinates. Coordinates are always
    /// finite, so `total_cmp` agrees with the usual order.
    pub fn lex_cmp(&self, other: &Point) -> Ordering {
        for (a, b) in self.0.iter().zip(other.0.iter()) {
            match a.total_cmp(b) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        self.0.len().cmp(&other.0.len())
    }

    /// True when every coordinate agrees within `tol`.
    pub fn approx_eq(&self, other: &Point, tol: Tolerance) -> bool {
        self.0.len() == other.0.len()
            && self
                .0
                .iter()
                .zip(other.0.iter())
                .all(|(a, b)| tol.eq(*a, *b))
    }
}

impl From<Vec<f64>> for Point {
    fn from(coords: Vec<f64>) -> Self {
        Point(coords)
    }
}

/// A finite, duplicate-free set of points in canonical lexicographic order.
///
/// Canonical order plus tolerance-merging of near-duplicates is the crate's
/// determinism contract: two computations yielding the same mathematical set
/// produce the same `PointSet` byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PointSet {
    points: Vec<Point>,
}

impl PointSet {
    pub fn empty() -> Self {
        PointSet { points: Vec::new() }
    }

    /// Sorts, then merges runs of points whose coordinates all agree within
    /// `tol`, keeping the lexicographically smallest representative.
    pub fn from_points(mut points: Vec<Point>, tol: Tolerance) -> Self {
        points.sort_by(|a, b| a.lex_cmp(b));
        let mut merged: Vec<Point> = Vec::with_capacity(points.len());
        for p in points {
            match merged.last() {
                Some(last) if last.approx_eq(&p, tol) => {}
                _ => merged.push(p),
            }
        }
        PointSet { points: merged }
    }

    /// Wraps points that are already sorted and deduplicated. Used by grid
    /// construction and order-preserving filters.
    pub(crate) fn from_canonical(points: Vec<Point>) -> Self {
        debug_assert!(points
            .windows(2)
            .all(|w| w[0].lex_cmp(&w[1]) == Ordering::Less));
        PointSet { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Point> {
        self.points.iter()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn get(&self, i: usize) -> &Point {
        &self.points[i]
    }

    /// Exact membership (bitwise coordinates), via binary search.
    pub fn contains(&self, p: &Point) -> bool {
        self.points.binary_search_by(|q| q.lex_cmp(p)).is_ok()
    }

    /// Membership up to tolerance. A linear scan over the neighborhood of the
    /// binary-search position would be fragile when tolerance bands overlap
    /// ordering, so this checks the candidates adjacent to the insertion
    /// point; grid spacing is far larger than `tol` in practice.
    pub fn contains_approx(&self, p: &Point, tol: Tolerance) -> bool {
        let idx = match self.points.binary_search_by(|q| q.lex_cmp(p)) {
            Ok(_) => return true,
            Err(idx) => idx,
        };
        let lo = idx.saturating_sub(2);
        let hi = (idx + 2).min(self.points.len());
        self.points[lo..hi].iter().any(|q| q.approx_eq(p, tol))
    }

    /// True when every point of `self` is a member of `other` (exact).
    pub fn is_subset(&self, other: &PointSet) -> bool {
        self.points.iter().all(|p| other.contains(p))
    }

    /// Intersection of two sets drawn from a common candidate universe, so
    /// exact coordinate equality is the right notion.
    pub fn intersect(&self, other: &PointSet) -> PointSet {
        let points = self
            .points
            .iter()
            .filter(|p| other.contains(p))
            .cloned()
            .collect();
        PointSet::from_canonical(points)
    }

    pub fn to_vec(&self) -> Vec<Point> {
        self.points.clone()
    }
}

impl<'a> IntoIterator for &'a PointSet {
    type Item = &'a Point;
    type IntoIter = std::slice::Iter<'a, Point>;

    fn into_iter(self) -> Self::IntoIter {
        self.points.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_order_and_merge() {
        let tol = Tolerance::default();
        let set = PointSet::from_points(
            vec![
                Point::new(vec![1.0, 0.0]),
                Point::new(vec![0.0, 1.0]),
                Point::new(vec![0.0, 1.0 + 1e-12]),
                Point::new(vec![0.0, 0.0]),
            ],
            tol,
        );
        assert_eq!(set.len(), 3);
        assert_eq!(set.get(0).coords(), &[0.0, 0.0]);
        assert_eq!(set.get(1).coords(), &[0.0, 1.0]);
        assert_eq!(set.get(2).coords(), &[1.0, 0.0]);
    }

    #[test]
    fn membership_and_subset() {
        let tol = Tolerance::default();
        let a = PointSet::from_points(
            vec![Point::new(vec![0.0]), Point::new(vec![1.0])],
            tol,
        );
        let b = PointSet::from_points(
            vec![
                Point::new(vec![0.0]),
                Point::new(vec![1.0]),
                Point::new(vec![2.0]),
            ],
            tol,
        );
        assert!(a.is_subset(&b));
        assert!(!b.is_subset(&a));
        assert!(b.contains_approx(&Point::new(vec![2.0 + 1e-12]), tol));
        assert_eq!(a.intersect(&b).len(), 2);
    }
}
