//! Finite patterns: a set of live cells inside a bounding box.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Planar isometries of the square lattice.
///
/// `MirrorX` reflects across the horizontal axis (rows flip top to bottom),
/// `MirrorY` across the vertical axis (columns flip left to right).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Transform {
    Identity,
    Rot90,
    Rot180,
    Rot270,
    MirrorX,
    MirrorY,
    Transpose,
    AntiTranspose,
}

impl Transform {
    /// The dihedral group of the square.
    pub const ALL: [Transform; 8] = [
        Transform::Identity,
        Transform::Rot90,
        Transform::Rot180,
        Transform::Rot270,
        Transform::MirrorX,
        Transform::MirrorY,
        Transform::Transpose,
        Transform::AntiTranspose,
    ];

    /// Image of `(x, y)` in a `w`×`h` box, and the image box dimensions.
    /// `Rot90` turns clockwise (screen coordinates, y down).
    fn map(self, x: usize, y: usize, w: usize, h: usize) -> (usize, usize) {
        match self {
            Transform::Identity => (x, y),
            Transform::Rot90 => (h - 1 - y, x),
            Transform::Rot180 => (w - 1 - x, h - 1 - y),
            Transform::Rot270 => (y, w - 1 - x),
            Transform::MirrorX => (x, h - 1 - y),
            Transform::MirrorY => (w - 1 - x, y),
            Transform::Transpose => (y, x),
            Transform::AntiTranspose => (h - 1 - y, w - 1 - x),
        }
    }

    fn swaps_axes(self) -> bool {
        matches!(
            self,
            Transform::Rot90 | Transform::Rot270 | Transform::Transpose | Transform::AntiTranspose
        )
    }
}

impl std::str::FromStr for Transform {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "identity" => Transform::Identity,
            "rot90" => Transform::Rot90,
            "rot180" => Transform::Rot180,
            "rot270" => Transform::Rot270,
            "mirror-x" => Transform::MirrorX,
            "mirror-y" => Transform::MirrorY,
            "transpose" => Transform::Transpose,
            "anti-transpose" => Transform::AntiTranspose,
            _ => return Err(Error::InvalidArgument(format!("unknown transform {s:?}"))),
        })
    }
}

/// A finite set of live cells inside a `width`×`height` box.
///
/// Cells are kept sorted row-major, so two patterns with the same box and
/// live set compare equal regardless of how they were built.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Pattern {
    width: usize,
    height: usize,
    cells: Vec<(usize, usize)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
}

impl Pattern {
    pub fn empty() -> Self {
        Self {
            width: 0,
            height: 0,
            cells: Vec::new(),
            name: None,
        }
    }

    /// Cells inside an explicit box. Panics if a cell lies outside it.
    pub fn with_box(width: usize, height: usize, mut cells: Vec<(usize, usize)>) -> Self {
        assert!(
            cells.iter().all(|&(x, y)| x < width && y < height),
            "cell outside {width}x{height} box"
        );
        cells.sort_by_key(|&(x, y)| (y, x));
        cells.dedup();
        Self {
            width,
            height,
            cells,
            name: None,
        }
    }

    /// Tight pattern from arbitrary integer coordinates.
    pub fn from_cells<I: IntoIterator<Item = (i64, i64)>>(cells: I) -> Self {
        let cells: Vec<(i64, i64)> = cells.into_iter().collect();
        if cells.is_empty() {
            return Self::empty();
        }
        let x0 = cells.iter().map(|c| c.0).min().unwrap();
        let y0 = cells.iter().map(|c| c.1).min().unwrap();
        let x1 = cells.iter().map(|c| c.0).max().unwrap();
        let y1 = cells.iter().map(|c| c.1).max().unwrap();
        Self::with_box(
            (x1 - x0 + 1) as usize,
            (y1 - y0 + 1) as usize,
            cells
                .iter()
                .map(|&(x, y)| ((x - x0) as usize, (y - y0) as usize))
                .collect(),
        )
    }

    /// Rows of `1`/`O`/`o`/`*`/`#` (alive) and `0`/`.`/`b` (dead). The box is
    /// the rows' extent, not normalised.
    pub fn from_rows<S: AsRef<str>>(rows: &[S]) -> Result<Self> {
        let width = rows
            .iter()
            .map(|r| r.as_ref().chars().count())
            .max()
            .unwrap_or(0);
        let mut cells = Vec::new();
        for (y, row) in rows.iter().enumerate() {
            for (x, ch) in row.as_ref().chars().enumerate() {
                match ch {
                    '1' | 'O' | 'o' | '*' | '#' => cells.push((x, y)),
                    '0' | '.' | 'b' => {}
                    _ => {
                        return Err(Error::Parse {
                            line: y + 1,
                            column: x + 1,
                            message: format!("unexpected cell symbol {ch:?}"),
                        })
                    }
                }
            }
        }
        Ok(Self::with_box(width, rows.len(), cells))
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn mass(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Live cells, row-major.
    pub fn cells(&self) -> &[(usize, usize)] {
        &self.cells
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        self.cells
            .binary_search_by_key(&(y, x), |&(cx, cy)| (cy, cx))
            .is_ok()
    }

    /// Shrink the box to the live cells (an empty pattern becomes 0×0).
    pub fn normalized(&self) -> Pattern {
        let mut p = Self::from_cells(self.cells.iter().map(|&(x, y)| (x as i64, y as i64)));
        p.name = self.name.clone();
        p
    }

    pub fn is_tight(&self) -> bool {
        if self.cells.is_empty() {
            return self.width == 0 && self.height == 0;
        }
        let touches = |f: &dyn Fn(&(usize, usize)) -> bool| self.cells.iter().any(f);
        touches(&|c| c.0 == 0)
            && touches(&|c| c.1 == 0)
            && touches(&|c| c.0 + 1 == self.width)
            && touches(&|c| c.1 + 1 == self.height)
    }

    /// Image under `t`, renormalised to a tight box.
    pub fn transform(&self, t: Transform) -> Pattern {
        let (w, h) = (self.width, self.height);
        let (nw, nh) = if t.swaps_axes() { (h, w) } else { (w, h) };
        let cells = self.cells.iter().map(|&(x, y)| t.map(x, y, w, h)).collect();
        let mut p = Pattern::with_box(nw, nh, cells).normalized();
        p.name = self.name.clone();
        p
    }

    /// Lexicographically least row-major cell list over the eight images.
    pub fn canonical(&self) -> Pattern {
        let mut best = self.normalized();
        for t in Transform::ALL {
            let img = self.transform(t);
            if img.key() < best.key() {
                best = img;
            }
        }
        best
    }

    fn key(&self) -> (usize, usize, Vec<(usize, usize)>) {
        (
            self.height,
            self.width,
            self.cells.iter().map(|&(x, y)| (y, x)).collect(),
        )
    }

    /// Same live set up to translation.
    pub fn same_shape(&self, other: &Pattern) -> bool {
        let (a, b) = (self.normalized(), other.normalized());
        a.cells == b.cells
    }

    /// Union with `other` drawn at offset `(dx, dy)`; the box grows to fit.
    pub fn union_at(&self, other: &Pattern, dx: i64, dy: i64) -> Pattern {
        let cells = self.cells.iter().map(|&(x, y)| (x as i64, y as i64)).chain(
            other
                .cells
                .iter()
                .map(|&(x, y)| (x as i64 + dx, y as i64 + dy)),
        );
        Pattern::from_cells(cells)
    }

    /// Rows of `.`/`O`.
    pub fn to_rows(&self) -> Vec<String> {
        (0..self.height)
            .map(|y| {
                (0..self.width)
                    .map(|x| if self.contains(x, y) { 'O' } else { '.' })
                    .collect()
            })
            .collect()
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.to_rows() {
            writeln!(f, "{row}")?;
        }
        Ok(())
    }
}
