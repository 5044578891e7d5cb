//! Lattice windows, point configurations and integer partitions.

use std::collections::HashMap;
use std::fmt;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WindowKind {
    FullLine,
    HalfLine,
}

/// Finite piece `{lo + a, …, hi + a}` of `ℤ + a` or `ℤ≥0 + a`.
///
/// Points are addressed by their integer index; the real position
/// `index + offset` is derived on demand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    offset: f64,
    kind: WindowKind,
    lo: i64,
    hi: i64,
}

impl Window {
    pub fn new(offset: f64, kind: WindowKind, lo: i64, hi: i64) -> Result<Self> {
        if !offset.is_finite() {
            return Err(Error::Validation("window offset must be finite".into()));
        }
        if lo > hi {
            return Err(Error::Validation(format!("window lo {lo} exceeds hi {hi}")));
        }
        if kind == WindowKind::HalfLine && lo != 0 {
            return Err(Error::Validation("half-line windows start at index 0".into()));
        }
        Ok(Self { offset, kind, lo, hi })
    }

    /// `{0, …, hi}` on `ℤ≥0`.
    pub fn half_line(hi: i64) -> Result<Self> {
        Self::new(0.0, WindowKind::HalfLine, 0, hi)
    }

    /// `{lo, …, hi}` on `ℤ`.
    pub fn integers(lo: i64, hi: i64) -> Result<Self> {
        Self::new(0.0, WindowKind::FullLine, lo, hi)
    }

    /// `{lo + 1/2, …, hi + 1/2}` on `ℤ + 1/2`.
    pub fn half_integers(lo: i64, hi: i64) -> Result<Self> {
        Self::new(0.5, WindowKind::FullLine, lo, hi)
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn kind(&self) -> WindowKind {
        self.kind
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.hi
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, index: i64) -> bool {
        (self.lo..=self.hi).contains(&index)
    }

    /// Real position of a lattice index.
    pub fn point(&self, index: i64) -> f64 {
        index as f64 + self.offset
    }

    /// Zero-based row of a lattice index inside the window.
    pub fn position(&self, index: i64) -> Option<usize> {
        self.contains(index).then(|| (index - self.lo) as usize)
    }

    pub fn index_at(&self, position: usize) -> i64 {
        self.lo + position as i64
    }

    pub fn indices(&self) -> impl Iterator<Item = i64> {
        self.lo..=self.hi
    }

    pub fn points(&self) -> Vec<f64> {
        self.indices().map(|i| self.point(i)).collect()
    }

    /// Same lattice and kind, different bounds.
    pub fn with_bounds(&self, lo: i64, hi: i64) -> Result<Self> {
        Self::new(self.offset, self.kind, lo, hi)
    }
}

/// Finite simple configuration: a strictly increasing set of occupied indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    window: Window,
    occupied: Vec<i64>,
}

impl Configuration {
    /// Builds a configuration from indices in any order.
    pub fn new(window: Window, mut occupied: Vec<i64>) -> Result<Self> {
        occupied.sort_unstable();
        if occupied.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Validation("configuration has a repeated point".into()));
        }
        if let Some(&bad) = occupied.iter().find(|&&i| !window.contains(i)) {
            return Err(Error::Range(format!("index {bad} lies outside the window")));
        }
        Ok(Self { window, occupied })
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn indices(&self) -> &[i64] {
        &self.occupied
    }

    pub fn points(&self) -> Vec<f64> {
        self.occupied.iter().map(|&i| self.window.point(i)).collect()
    }

    pub fn len(&self) -> usize {
        self.occupied.len()
    }

    pub fn is_empty(&self) -> bool {
        self.occupied.is_empty()
    }

    pub fn contains(&self, index: i64) -> bool {
        self.occupied.binary_search(&index).is_ok()
    }
}

impl Serialize for Configuration {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.occupied.serialize(s)
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.occupied.iter().join(","))
    }
}

/// All `n`-point configurations of the window in lexicographic order.
pub fn enumerate_configurations(window: &Window, n: usize) -> Result<Vec<Configuration>> {
    if n > window.len() {
        return Err(Error::EmptyDomain { requested: n, size: window.len() });
    }
    Ok(window
        .indices()
        .combinations(n)
        .map(|occupied| Configuration { window: *window, occupied })
        .collect())
}

/// Indexed list of every `n`-point configuration of a window.
#[derive(Debug, Clone)]
pub struct ConfigurationSpace {
    window: Window,
    n: usize,
    configs: Vec<Configuration>,
    lookup: HashMap<Vec<i64>, usize>,
}

impl ConfigurationSpace {
    pub fn new(window: &Window, n: usize) -> Result<Self> {
        let configs = enumerate_configurations(window, n)?;
        let lookup = configs.iter().enumerate().map(|(k, c)| (c.occupied.clone(), k)).collect();
        Ok(Self { window: *window, n, configs, lookup })
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn particles(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.configs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.configs.is_empty()
    }

    pub fn configs(&self) -> &[Configuration] {
        &self.configs
    }

    pub fn get(&self, k: usize) -> &Configuration {
        &self.configs[k]
    }

    /// Position of the configuration with these sorted indices.
    pub fn find(&self, sorted: &[i64]) -> Option<usize> {
        self.lookup.get(sorted).copied()
    }
}

/// Integer partition, parts weakly decreasing and positive.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct Partition {
    parts: Vec<u32>,
}

impl TryFrom<Vec<u32>> for Partition {
    type Error = Error;
    fn try_from(parts: Vec<u32>) -> Result<Self> {
        Partition::new(parts)
    }
}

impl From<Partition> for Vec<u32> {
    fn from(p: Partition) -> Self {
        p.parts
    }
}

impl Partition {
    /// Trailing zeros are dropped; anything else out of order is rejected.
    pub fn new(mut parts: Vec<u32>) -> Result<Self> {
        while parts.last() == Some(&0) {
            parts.pop();
        }
        if parts.windows(2).any(|w| w[0] < w[1]) || parts.contains(&0) {
            return Err(Error::Validation(format!("{parts:?} is not a partition")));
        }
        Ok(Self { parts })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    /// Row `i` (zero-based), zero past the last part.
    pub fn part(&self, i: usize) -> u32 {
        self.parts.get(i).copied().unwrap_or(0)
    }

    pub fn size(&self) -> usize {
        self.parts.iter().map(|&p| p as usize).sum()
    }

    /// Number of nonzero parts.
    pub fn length(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn conjugate(&self) -> Partition {
        let width = self.part(0) as usize;
        let parts = (0..width)
            .map(|j| self.parts.iter().filter(|&&p| p as usize > j).count() as u32)
            .collect();
        Partition { parts }
    }

    /// Whether the diagram of `other` fits inside this one.
    pub fn contains(&self, other: &Partition) -> bool {
        other.length() <= self.length() && other.parts.iter().zip(&self.parts).all(|(a, b)| a <= b)
    }

    /// Boxes as zero-based `(row, column)` pairs, row by row.
    pub fn boxes(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.parts.iter().enumerate().flat_map(|(i, &p)| (0..p as usize).map(move |j| (i, j)))
    }

    /// Boxes of the skew shape `self / inner`.
    pub fn skew_boxes<'a>(&'a self, inner: &'a Partition) -> impl Iterator<Item = (usize, usize)> + 'a {
        self.parts
            .iter()
            .enumerate()
            .flat_map(move |(i, &p)| (inner.part(i) as usize..p as usize).map(move |j| (i, j)))
    }

    /// Rows where a box can be added.
    pub fn addable_rows(&self) -> Vec<usize> {
        (0..=self.length()).filter(|&i| i == 0 || self.part(i) < self.part(i - 1)).collect()
    }

    /// Rows ending in a removable corner.
    pub fn removable_rows(&self) -> Vec<usize> {
        (0..self.length()).filter(|&i| self.part(i) > self.part(i + 1)).collect()
    }

    /// Adds a box at the end of row `i`; the row must be addable.
    pub fn with_box(&self, i: usize) -> Partition {
        let mut parts = self.parts.clone();
        if i == parts.len() {
            parts.push(1);
        } else {
            parts[i] += 1;
        }
        debug_assert!(i == 0 || parts[i] <= parts[i - 1]);
        Partition { parts }
    }

    /// Removes the last box of row `i`; the row must end in a corner.
    pub fn without_box(&self, i: usize) -> Partition {
        let mut parts = self.parts.clone();
        parts[i] -= 1;
        debug_assert!(i + 1 >= parts.len() || parts[i] >= parts[i + 1]);
        while parts.last() == Some(&0) {
            parts.pop();
        }
        Partition { parts }
    }

    /// Every partition of `n`, in decreasing lexicographic order.
    pub fn all_of_size(n: usize) -> Vec<Partition> {
        fn rec(remaining: u32, max: u32, prefix: &mut Vec<u32>, out: &mut Vec<Partition>) {
            if remaining == 0 {
                out.push(Partition { parts: prefix.clone() });
                return;
            }
            for p in (1..=max.min(remaining)).rev() {
                prefix.push(p);
                rec(remaining - p, p, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        rec(n as u32, n as u32, &mut Vec::new(), &mut out);
        out
    }

    /// Every partition of size at most `n`, grouped by size.
    pub fn all_up_to(n: usize) -> Vec<Partition> {
        (0..=n).flat_map(Partition::all_of_size).collect()
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.parts.iter().join(","))
    }
}

/// Arm and leg lengths of the diagonal boxes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrobeniusCoords {
    pub arms: Vec<u32>,
    pub legs: Vec<u32>,
    /// When set, every entry is read as `value + 1/2`.
    pub modified: bool,
}

impl FrobeniusCoords {
    pub fn rank(&self) -> usize {
        self.arms.len()
    }

    pub fn arm_values(&self) -> Vec<f64> {
        self.values(&self.arms)
    }

    pub fn leg_values(&self) -> Vec<f64> {
        self.values(&self.legs)
    }

    fn values(&self, v: &[u32]) -> Vec<f64> {
        let shift = if self.modified { 0.5 } else { 0.0 };
        v.iter().map(|&a| a as f64 + shift).collect()
    }

    /// `Σ(α_i + β_i)`, computed in integers; for modified coordinates each
    /// diagonal box contributes its two halves.
    pub fn total(&self) -> u64 {
        let base: u64 = self.arms.iter().chain(&self.legs).map(|&a| a as u64).sum();
        if self.modified {
            base + self.rank() as u64
        } else {
            base
        }
    }
}

pub fn frobenius_coordinates(lambda: &Partition, modified: bool) -> FrobeniusCoords {
    let conj = lambda.conjugate();
    let d = (0..lambda.length()).take_while(|&i| lambda.part(i) as usize > i).count();
    FrobeniusCoords {
        arms: (0..d).map(|i| lambda.part(i) - i as u32 - 1).collect(),
        legs: (0..d).map(|i| conj.part(i) - i as u32 - 1).collect(),
        modified,
    }
}

pub fn partition_from_frobenius(coords: &FrobeniusCoords) -> Result<Partition> {
    let strictly_decreasing = |v: &[u32]| v.windows(2).all(|w| w[0] > w[1]);
    if coords.arms.len() != coords.legs.len() {
        return Err(Error::Validation("arms and legs differ in length".into()));
    }
    if !strictly_decreasing(&coords.arms) || !strictly_decreasing(&coords.legs) {
        return Err(Error::Validation("Frobenius coordinates must be strictly decreasing".into()));
    }
    let d = coords.rank();
    if d == 0 {
        return Ok(Partition::empty());
    }
    // Rows inside the Durfee square come from the arms; a row below it counts
    // the diagonal columns that reach down that far.
    let rows = coords.legs[0] as usize + 1;
    let mut parts: Vec<u32> =
        coords.arms.iter().enumerate().map(|(i, &a)| a + i as u32 + 1).collect();
    for i in d..rows {
        let reach = coords.legs.iter().enumerate().filter(|(j, &b)| j + b as usize >= i).count();
        parts.push(reach as u32);
    }
    Partition::new(parts)
}

/// `ω^λ = {λ_i − i + 1/2}` intersected with a window of `ℤ + 1/2`.
pub fn embed_partition(lambda: &Partition, window: &Window) -> Result<Configuration> {
    if window.offset() != 0.5 {
        return Err(Error::Validation("partitions embed into ℤ + 1/2".into()));
    }
    let top = lambda.part(0) as i64 - 1;
    if top > window.hi() {
        return Err(Error::Range(format!(
            "largest point {} lies above the window",
            window.point(top)
        )));
    }
    let mut occupied = Vec::new();
    for i in 1.. {
        let index = lambda.part(i - 1) as i64 - i as i64;
        if index < window.lo() {
            break;
        }
        occupied.push(index);
    }
    occupied.reverse();
    Configuration::new(*window, occupied)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(parts: &[u32]) -> Partition {
        Partition::new(parts.to_vec()).unwrap()
    }

    #[test]
    fn configuration_counts() {
        let w = Window::half_line(2).unwrap();
        assert_eq!(enumerate_configurations(&w, 0).unwrap().len(), 1);
        let full = enumerate_configurations(&w, 3).unwrap();
        assert_eq!(full.len(), 1);
        assert_eq!(full[0].indices(), &[0, 1, 2]);
        let w4 = Window::half_line(3).unwrap();
        let pairs = enumerate_configurations(&w4, 2).unwrap();
        assert_eq!(pairs.len(), 6);
        assert_eq!(pairs[0].indices(), &[0, 1]);
        assert_eq!(pairs[5].indices(), &[2, 3]);
        assert!(matches!(
            enumerate_configurations(&w, 4),
            Err(Error::EmptyDomain { requested: 4, size: 3 })
        ));
    }

    #[test]
    fn window_validation() {
        assert!(Window::new(0.0, WindowKind::HalfLine, 1, 4).is_err());
        assert!(Window::integers(3, 2).is_err());
        let w = Window::half_integers(-2, 1).unwrap();
        assert_eq!(w.points(), vec![-1.5, -0.5, 0.5, 1.5]);
    }

    #[test]
    fn configuration_rejects_repeats_and_outsiders() {
        let w = Window::integers(-2, 2).unwrap();
        assert!(Configuration::new(w, vec![1, 1]).is_err());
        assert!(Configuration::new(w, vec![3]).is_err());
        let c = Configuration::new(w, vec![2, -1]).unwrap();
        assert_eq!(c.indices(), &[-1, 2]);
        assert_eq!(serde_json::to_string(&c).unwrap(), "[-1,2]");
    }

    #[test]
    fn frobenius_example() {
        let f = frobenius_coordinates(&p(&[5, 4, 4, 1]), false);
        assert_eq!(f.arms, vec![4, 2, 1]);
        assert_eq!(f.legs, vec![3, 1, 0]);
        assert_eq!(partition_from_frobenius(&f).unwrap(), p(&[5, 4, 4, 1]));
        let e = frobenius_coordinates(&Partition::empty(), false);
        assert_eq!(e.rank(), 0);
        assert_eq!(partition_from_frobenius(&e).unwrap(), Partition::empty());
        let one = frobenius_coordinates(&p(&[1]), true);
        assert_eq!(one.arm_values(), vec![0.5]);
        assert_eq!(one.leg_values(), vec![0.5]);
        assert_eq!(one.total(), 1);
    }

    #[test]
    fn frobenius_rejects_bad_input() {
        let bad = FrobeniusCoords { arms: vec![1, 2], legs: vec![1, 0], modified: false };
        assert!(partition_from_frobenius(&bad).is_err());
        let uneven = FrobeniusCoords { arms: vec![1], legs: vec![], modified: false };
        assert!(partition_from_frobenius(&uneven).is_err());
    }

    #[test]
    fn partition_counts_and_serialization() {
        let counts: Vec<usize> = (0..=8).map(|n| Partition::all_of_size(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 2, 3, 5, 7, 11, 15, 22]);
        assert_eq!(serde_json::to_string(&p(&[5, 4, 4, 1])).unwrap(), "[5,4,4,1]");
        let back: Partition = serde_json::from_str("[3,1]").unwrap();
        assert_eq!(back, p(&[3, 1]));
        assert!(serde_json::from_str::<Partition>("[1,3]").is_err());
    }

    #[test]
    fn corners() {
        let l = p(&[3, 1, 1]);
        assert_eq!(l.addable_rows(), vec![0, 1, 3]);
        assert_eq!(l.removable_rows(), vec![0, 2]);
        assert_eq!(l.with_box(1), p(&[3, 2, 1]));
        assert_eq!(l.without_box(2), p(&[3, 1]));
        assert_eq!(l.conjugate(), p(&[3, 1, 1]));
        assert_eq!(p(&[4, 2]).conjugate(), p(&[2, 2, 1, 1]));
    }

    #[test]
    fn embedding() {
        let w = Window::half_integers(-4, 3).unwrap();
        let empty = embed_partition(&Partition::empty(), &w).unwrap();
        assert_eq!(empty.points(), vec![-3.5, -2.5, -1.5, -0.5]);
        let one = embed_partition(&p(&[1]), &w).unwrap();
        assert_eq!(one.points(), vec![-3.5, -2.5, -1.5, 0.5]);
        assert!(embed_partition(&p(&[6]), &w).is_err());
    }
}
