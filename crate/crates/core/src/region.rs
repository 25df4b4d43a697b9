//! Hypothesis regions over named scalar parameters.
//!
//! A [`Region`] is a finite union of axis-aligned cells. Each cell holds one
//! [`ScalarRegion`] (a sorted union of disjoint intervals) per parameter of the
//! [`ParameterSpace`]. This is closed under intersection, union and complement,
//! and every supremum over a region reduces to suprema over closed boxes.

use std::collections::HashSet;
use std::fmt;

use serde::ser::{SerializeMap, SerializeStruct};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::serde_ext::extended_real;

/// An interval with open/closed endpoints. Infinite endpoints are always open.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    #[serde(serialize_with = "extended_real")]
    pub lo: f64,
    #[serde(serialize_with = "extended_real")]
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn new(lo: f64, hi: f64, lo_closed: bool, hi_closed: bool) -> Self {
        Interval {
            lo,
            hi,
            lo_closed: lo_closed && lo.is_finite(),
            hi_closed: hi_closed && hi.is_finite(),
        }
    }

    pub fn closed(lo: f64, hi: f64) -> Self {
        Self::new(lo, hi, true, true)
    }

    pub fn open(lo: f64, hi: f64) -> Self {
        Self::new(lo, hi, false, false)
    }

    pub fn point(x: f64) -> Self {
        Self::closed(x, x)
    }

    pub fn real_line() -> Self {
        Self::open(f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn is_empty(&self) -> bool {
        self.lo.is_nan()
            || self.hi.is_nan()
            || self.lo > self.hi
            || (self.lo == self.hi && !(self.lo_closed && self.hi_closed))
    }

    pub fn is_degenerate(&self) -> bool {
        self.lo == self.hi && !self.is_empty()
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_closed { x >= self.lo } else { x > self.lo };
        let below = if self.hi_closed { x <= self.hi } else { x < self.hi };
        above && below
    }

    pub fn closure(&self) -> Interval {
        Interval::new(self.lo, self.hi, true, true)
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let (lo, lo_closed) = if self.lo > other.lo {
            (self.lo, self.lo_closed)
        } else if other.lo > self.lo {
            (other.lo, other.lo_closed)
        } else {
            (self.lo, self.lo_closed && other.lo_closed)
        };
        let (hi, hi_closed) = if self.hi < other.hi {
            (self.hi, self.hi_closed)
        } else if other.hi < self.hi {
            (other.hi, other.hi_closed)
        } else {
            (self.hi, self.hi_closed && other.hi_closed)
        };
        let out = Interval::new(lo, hi, lo_closed, hi_closed);
        (!out.is_empty()).then_some(out)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_degenerate() {
            return write!(f, "{{{}}}", self.lo);
        }
        write!(
            f,
            "{}{}, {}{}",
            if self.lo_closed { '[' } else { '(' },
            self.lo,
            self.hi,
            if self.hi_closed { ']' } else { ')' }
        )
    }
}

/// A finite union of disjoint, non-empty intervals sorted in ascending order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ScalarRegion {
    intervals: Vec<Interval>,
}

impl ScalarRegion {
    pub fn empty() -> Self {
        ScalarRegion::default()
    }

    pub fn from_interval(iv: Interval) -> Self {
        Self::from_intervals([iv])
    }

    /// Builds a normalized region: empty pieces dropped, overlapping or touching pieces merged.
    pub fn from_intervals<I: IntoIterator<Item = Interval>>(intervals: I) -> Self {
        let mut ivs: Vec<Interval> = intervals.into_iter().filter(|iv| !iv.is_empty()).collect();
        ivs.sort_by(|a, b| a.lo.total_cmp(&b.lo).then_with(|| b.lo_closed.cmp(&a.lo_closed)));
        let mut out: Vec<Interval> = Vec::with_capacity(ivs.len());
        for iv in ivs {
            match out.last_mut() {
                Some(cur) if iv.lo < cur.hi || (iv.lo == cur.hi && (cur.hi_closed || iv.lo_closed)) => {
                    if iv.hi > cur.hi {
                        cur.hi = iv.hi;
                        cur.hi_closed = iv.hi_closed;
                    } else if iv.hi == cur.hi {
                        cur.hi_closed |= iv.hi_closed;
                    }
                }
                _ => out.push(iv),
            }
        }
        ScalarRegion { intervals: out }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|iv| iv.contains(x))
    }

    pub fn union(&self, other: &ScalarRegion) -> ScalarRegion {
        Self::from_intervals(self.intervals.iter().chain(other.intervals.iter()).copied())
    }

    pub fn intersect(&self, other: &ScalarRegion) -> ScalarRegion {
        let mut out = Vec::new();
        for a in &self.intervals {
            for b in &other.intervals {
                if let Some(c) = a.intersect(b) {
                    out.push(c);
                }
            }
        }
        Self::from_intervals(out)
    }

    /// Complement relative to `domain`.
    pub fn complement_within(&self, domain: &Interval) -> ScalarRegion {
        let mut out = Vec::new();
        let (mut start, mut start_closed) = (domain.lo, domain.lo_closed);
        for iv in &self.intervals {
            let Some(iv) = iv.intersect(domain) else { continue };
            out.push(Interval::new(start, iv.lo, start_closed, !iv.lo_closed));
            start = iv.hi;
            start_closed = !iv.hi_closed;
        }
        out.push(Interval::new(start, domain.hi, start_closed, domain.hi_closed));
        Self::from_intervals(out)
    }

    pub fn closure(&self) -> ScalarRegion {
        Self::from_intervals(self.intervals.iter().map(Interval::closure))
    }

    pub fn is_subset_of(&self, other: &ScalarRegion) -> bool {
        self.intersect(other) == *self
    }
}

impl fmt::Display for ScalarRegion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.intervals.is_empty() {
            return write!(f, "∅");
        }
        for (i, iv) in self.intervals.iter().enumerate() {
            if i > 0 {
                write!(f, " ∪ ")?;
            }
            write!(f, "{iv}")?;
        }
        Ok(())
    }
}

impl Serialize for ScalarRegion {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.intervals.serialize(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Parameter {
    pub name: String,
    pub domain: Interval,
}

impl Parameter {
    pub fn new(name: impl Into<String>, domain: Interval) -> Self {
        Parameter {
            name: name.into(),
            domain,
        }
    }
}

/// Ordered list of named scalar parameters, each with its own domain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParameterSpace {
    params: Vec<Parameter>,
}

impl ParameterSpace {
    pub fn new(params: Vec<Parameter>) -> Result<Self> {
        if params.is_empty() {
            return Err(Error::InvalidSpace("no parameters".into()));
        }
        let mut seen = HashSet::new();
        for p in &params {
            if !is_identifier(&p.name) {
                return Err(Error::InvalidSpace(format!("`{}` is not an identifier", p.name)));
            }
            if !seen.insert(p.name.as_str()) {
                return Err(Error::InvalidSpace(format!("duplicate parameter `{}`", p.name)));
            }
            if !(p.domain.lo < p.domain.hi) {
                return Err(Error::InvalidSpace(format!(
                    "parameter `{}` needs lower < upper, got {}",
                    p.name, p.domain
                )));
            }
        }
        Ok(ParameterSpace { params })
    }

    /// Convenience for a one-parameter space.
    pub fn scalar(name: &str, domain: Interval) -> Result<Self> {
        Self::new(vec![Parameter::new(name, domain)])
    }

    pub fn params(&self) -> &[Parameter] {
        &self.params
    }

    pub fn dim(&self) -> usize {
        self.params.len()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.params.iter().position(|p| p.name == name)
    }

    pub fn domain(&self, idx: usize) -> &Interval {
        &self.params[idx].domain
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        point.len() == self.dim() && self.params.iter().zip(point).all(|(p, &x)| p.domain.contains(x))
    }
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// One axis-aligned piece of a region: a scalar constraint per parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    constraints: Vec<ScalarRegion>,
}

impl Cell {
    fn full(space: &ParameterSpace) -> Self {
        Cell {
            constraints: space
                .params
                .iter()
                .map(|p| ScalarRegion::from_interval(p.domain))
                .collect(),
        }
    }

    pub fn constraint(&self, idx: usize) -> &ScalarRegion {
        &self.constraints[idx]
    }

    pub fn constraints(&self) -> &[ScalarRegion] {
        &self.constraints
    }

    fn is_empty(&self) -> bool {
        self.constraints.iter().any(ScalarRegion::is_empty)
    }

    fn intersect(&self, other: &Cell) -> Cell {
        Cell {
            constraints: self
                .constraints
                .iter()
                .zip(&other.constraints)
                .map(|(a, b)| a.intersect(b))
                .collect(),
        }
    }

    fn is_subset_of(&self, other: &Cell) -> bool {
        self.constraints
            .iter()
            .zip(&other.constraints)
            .all(|(a, b)| a.is_subset_of(b))
    }

    fn contains(&self, point: &[f64]) -> bool {
        self.constraints.iter().zip(point).all(|(c, &x)| c.contains(x))
    }

    /// Every closed box (one closed interval per parameter) whose union is the closure of this cell.
    pub fn closed_boxes(&self) -> Vec<Vec<Interval>> {
        let mut boxes: Vec<Vec<Interval>> = vec![Vec::new()];
        for c in &self.constraints {
            let closed = c.closure();
            let mut next = Vec::with_capacity(boxes.len() * closed.intervals.len());
            for b in &boxes {
                for iv in closed.intervals() {
                    let mut nb = b.clone();
                    nb.push(*iv);
                    next.push(nb);
                }
            }
            boxes = next;
        }
        boxes
    }
}

/// A subset of a parameter space: a finite union of cells.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    space: ParameterSpace,
    cells: Vec<Cell>,
}

impl Region {
    pub fn full(space: &ParameterSpace) -> Self {
        Region {
            space: space.clone(),
            cells: vec![Cell::full(space)],
        }
    }

    pub fn empty(space: &ParameterSpace) -> Self {
        Region {
            space: space.clone(),
            cells: Vec::new(),
        }
    }

    /// The region where parameter `name` lies in `set`, all other parameters free.
    pub fn constrain(space: &ParameterSpace, name: &str, set: &ScalarRegion) -> Result<Self> {
        let idx = space
            .index_of(name)
            .ok_or_else(|| Error::UnknownParameter(name.to_string()))?;
        let mut cell = Cell::full(space);
        cell.constraints[idx] = set.intersect(&cell.constraints[idx]);
        Ok(Region {
            space: space.clone(),
            cells: vec![cell],
        }
        .normalized())
    }

    /// The single point `point` of the space.
    pub fn point(space: &ParameterSpace, point: &[f64]) -> Result<Self> {
        if point.len() != space.dim() {
            return Err(Error::InvalidArgument(format!(
                "point has {} coordinates, space has {}",
                point.len(),
                space.dim()
            )));
        }
        let cell = Cell {
            constraints: space
                .params
                .iter()
                .zip(point)
                .map(|(p, &x)| {
                    ScalarRegion::from_interval(Interval::point(x)).intersect(&ScalarRegion::from_interval(p.domain))
                })
                .collect(),
        };
        Ok(Region {
            space: space.clone(),
            cells: vec![cell],
        }
        .normalized())
    }

    pub fn space(&self) -> &ParameterSpace {
        &self.space
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Errors with [`Error::EmptyRegion`] if the region has no points.
    pub fn non_empty(self) -> Result<Self> {
        if self.is_empty() {
            Err(Error::EmptyRegion)
        } else {
            Ok(self)
        }
    }

    pub fn is_full(&self) -> bool {
        let full = Cell::full(&self.space);
        self.cells.iter().any(|c| full.is_subset_of(c))
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        point.len() == self.space.dim() && self.cells.iter().any(|c| c.contains(point))
    }

    pub fn intersect(&self, other: &Region) -> Region {
        debug_assert_eq!(self.space, other.space);
        let mut cells = Vec::new();
        for a in &self.cells {
            for b in &other.cells {
                cells.push(a.intersect(b));
            }
        }
        Region {
            space: self.space.clone(),
            cells,
        }
        .normalized()
    }

    pub fn union(&self, other: &Region) -> Region {
        debug_assert_eq!(self.space, other.space);
        Region {
            space: self.space.clone(),
            cells: self.cells.iter().chain(&other.cells).cloned().collect(),
        }
        .normalized()
    }

    /// Set complement within the space box. May be empty; see [`Region::complement`].
    pub fn complement_unchecked(&self) -> Region {
        let mut acc = Region::full(&self.space);
        for cell in &self.cells {
            let mut pieces = Vec::new();
            for (i, c) in cell.constraints.iter().enumerate() {
                let mut piece = Cell::full(&self.space);
                piece.constraints[i] = c.complement_within(self.space.domain(i));
                pieces.push(piece);
            }
            let cell_complement = Region {
                space: self.space.clone(),
                cells: pieces,
            }
            .normalized();
            acc = acc.intersect(&cell_complement);
        }
        acc
    }

    /// Set complement within the space box; errors if either side is empty.
    pub fn complement(&self) -> Result<Region> {
        if self.is_empty() {
            return Err(Error::EmptyRegion);
        }
        self.complement_unchecked().non_empty()
    }

    /// Closes every interval endpoint (clipped to the space box, which may itself be open).
    pub fn closure(&self) -> Region {
        Region {
            space: self.space.clone(),
            cells: self
                .cells
                .iter()
                .map(|c| Cell {
                    constraints: c.constraints.iter().map(ScalarRegion::closure).collect(),
                })
                .collect(),
        }
        .normalized()
    }

    /// Indices of parameters constrained more tightly than their domain in some cell.
    pub fn constrained_params(&self) -> Vec<usize> {
        (0..self.space.dim())
            .filter(|&i| {
                let full = ScalarRegion::from_interval(*self.space.domain(i));
                self.cells.iter().any(|c| c.constraints[i] != full)
            })
            .collect()
    }

    /// If only parameter `idx` is constrained, the union of its scalar constraints.
    pub fn as_scalar(&self, idx: usize) -> Option<ScalarRegion> {
        let constrained = self.constrained_params();
        if constrained.iter().any(|&i| i != idx) {
            return None;
        }
        Some(
            self.cells
                .iter()
                .fold(ScalarRegion::empty(), |acc, c| acc.union(&c.constraints[idx])),
        )
    }

    fn normalized(mut self) -> Region {
        self.cells.retain(|c| !c.is_empty());
        loop {
            let mut changed = false;
            // Drop cells covered by another cell.
            let mut i = 0;
            while i < self.cells.len() {
                let covered = (0..self.cells.len()).any(|j| {
                    j != i && self.cells[i].is_subset_of(&self.cells[j]) && (self.cells[i] != self.cells[j] || j < i)
                });
                if covered {
                    self.cells.remove(i);
                    changed = true;
                } else {
                    i += 1;
                }
            }
            // Merge cells that differ in exactly one parameter.
            'outer: for i in 0..self.cells.len() {
                for j in (i + 1)..self.cells.len() {
                    let diff: Vec<usize> = (0..self.space.dim())
                        .filter(|&k| self.cells[i].constraints[k] != self.cells[j].constraints[k])
                        .collect();
                    if diff.len() == 1 {
                        let k = diff[0];
                        let merged = self.cells[i].constraints[k].union(&self.cells[j].constraints[k]);
                        self.cells[i].constraints[k] = merged;
                        self.cells.remove(j);
                        changed = true;
                        break 'outer;
                    }
                }
            }
            if !changed {
                return self;
            }
        }
    }
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.cells.is_empty() {
            return write!(f, "∅");
        }
        let constrained = self.constrained_params();
        for (ci, cell) in self.cells.iter().enumerate() {
            if ci > 0 {
                write!(f, " ∪ ")?;
            }
            if constrained.is_empty() {
                write!(f, "(all)")?;
                continue;
            }
            write!(f, "{{")?;
            for (k, &i) in constrained.iter().enumerate() {
                if k > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{} ∈ {}", self.space.params[i].name, cell.constraints[i])?;
            }
            write!(f, "}}")?;
        }
        Ok(())
    }
}

struct CellView<'a> {
    region: &'a Region,
    cell: &'a Cell,
}

impl Serialize for CellView<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let constrained = self.region.constrained_params();
        let mut map = s.serialize_map(Some(constrained.len()))?;
        for i in constrained {
            map.serialize_entry(&self.region.space.params[i].name, &self.cell.constraints[i])?;
        }
        map.end()
    }
}

impl Serialize for Region {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let cells: Vec<CellView<'_>> = self.cells.iter().map(|cell| CellView { region: self, cell }).collect();
        let mut st = s.serialize_struct("Region", 2)?;
        st.serialize_field("space", &self.space)?;
        st.serialize_field("cells", &cells)?;
        st.end()
    }
}
