//! Synchronous two-state Moore-neighbourhood evolution on a finite grid.
//!
//! Cells are packed 64 to a word, row-major. Everything outside the rectangle
//! is permanently dead and contributes nothing to neighbour counts.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pattern::Pattern;

/// Rows per grid above which `step` fans out over rayon.
const PARALLEL_MIN_ROWS: usize = 128;

/// Outer-totalistic rule: birth and survival neighbour-count sets over 0..=8.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RuleSpec {
    birth: u16,
    survival: u16,
}

impl RuleSpec {
    pub fn new(birth: &[u8], survival: &[u8]) -> Result<Self> {
        Ok(Self {
            birth: Self::mask(birth)?,
            survival: Self::mask(survival)?,
        })
    }

    fn mask(counts: &[u8]) -> Result<u16> {
        counts.iter().try_fold(0u16, |m, &k| {
            if k > 8 {
                Err(Error::InvalidArgument(format!(
                    "neighbour count {k} outside 0..=8"
                )))
            } else {
                Ok(m | 1 << k)
            }
        })
    }

    /// B2/S2345.
    pub fn b2s2345() -> Self {
        Self {
            birth: 1 << 2,
            survival: (1 << 2) | (1 << 3) | (1 << 4) | (1 << 5),
        }
    }

    /// Conway's B3/S23, handy as a contrasting rule in tests.
    pub fn conway() -> Self {
        Self {
            birth: 1 << 3,
            survival: (1 << 2) | (1 << 3),
        }
    }

    pub fn births(&self) -> impl Iterator<Item = u8> + '_ {
        (0..=8u8).filter(move |k| self.birth & (1 << k) != 0)
    }

    pub fn survivals(&self) -> impl Iterator<Item = u8> + '_ {
        (0..=8u8).filter(move |k| self.survival & (1 << k) != 0)
    }

    pub fn is_birth(&self, count: u8) -> bool {
        count <= 8 && self.birth & (1 << count) != 0
    }

    pub fn is_survival(&self, count: u8) -> bool {
        count <= 8 && self.survival & (1 << count) != 0
    }

    /// Next state of a single cell; the scalar reference for the packed kernel.
    pub fn next_state(&self, alive: bool, count: u8) -> bool {
        if alive {
            self.is_survival(count)
        } else {
            self.is_birth(count)
        }
    }
}

impl fmt::Display for RuleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "B")?;
        for k in self.births() {
            write!(f, "{k}")?;
        }
        write!(f, "/S")?;
        for k in self.survivals() {
            write!(f, "{k}")?;
        }
        Ok(())
    }
}

impl FromStr for RuleSpec {
    type Err = Error;

    /// Accepts `B…/S…` in either order and either case, and the bare `S/B`
    /// digit form (`2345/2`).
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Rule(s.to_string());
        let t = s.trim();
        let parts: Vec<&str> = t.split('/').collect();
        if parts.len() != 2 {
            return Err(bad());
        }
        let digits = |p: &str| -> Result<Vec<u8>> {
            p.chars()
                .map(|c| c.to_digit(10).filter(|&d| d <= 8).map(|d| d as u8))
                .collect::<Option<Vec<u8>>>()
                .ok_or_else(bad)
        };
        let (mut birth, mut survival) = (None, None);
        for p in &parts {
            let mut chars = p.chars();
            match chars.next().map(|c| c.to_ascii_uppercase()) {
                Some('B') if birth.is_none() => birth = Some(digits(chars.as_str())?),
                Some('S') if survival.is_none() => survival = Some(digits(chars.as_str())?),
                _ => {}
            }
        }
        match (birth, survival) {
            (Some(b), Some(s)) => RuleSpec::new(&b, &s),
            (None, None) => {
                // Golly's legacy "S/B" digit form.
                let s = digits(parts[0])?;
                let b = digits(parts[1])?;
                RuleSpec::new(&b, &s)
            }
            _ => Err(bad()),
        }
    }
}

/// Axis-aligned rectangle of cells.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Rect {
    pub x: usize,
    pub y: usize,
    pub width: usize,
    pub height: usize,
}

impl Rect {
    pub fn new(x: usize, y: usize, width: usize, height: usize) -> Self {
        Self {
            x,
            y,
            width,
            height,
        }
    }

    pub fn area(&self) -> usize {
        self.width * self.height
    }

    pub fn right(&self) -> usize {
        self.x + self.width
    }

    pub fn bottom(&self) -> usize {
        self.y + self.height
    }

    pub fn contains(&self, x: usize, y: usize) -> bool {
        x >= self.x && x < self.right() && y >= self.y && y < self.bottom()
    }

    pub fn fits_in(&self, width: usize, height: usize) -> bool {
        self.width > 0 && self.height > 0 && self.right() <= width && self.bottom() <= height
    }
}

impl FromStr for Rect {
    type Err = Error;

    /// `x,y,w,h`
    fn from_str(s: &str) -> Result<Self> {
        let v: Vec<usize> = s
            .split(',')
            .map(|p| p.trim().parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::InvalidArgument(format!("bad rectangle {s:?}")))?;
        match v[..] {
            [x, y, w, h] => Ok(Rect::new(x, y, w, h)),
            _ => Err(Error::InvalidArgument(format!("bad rectangle {s:?}"))),
        }
    }
}

/// Finite two-state lattice with a dead exterior.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Grid {
    width: usize,
    height: usize,
    words_per_row: usize,
    cells: Vec<u64>,
    generation: u64,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("width", &self.width)
            .field("height", &self.height)
            .field("generation", &self.generation)
            .field("population", &self.population())
            .finish()
    }
}

impl Grid {
    pub fn new(width: usize, height: usize) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidArgument(format!(
                "grid dimensions must be positive, got {width}x{height}"
            )));
        }
        let words_per_row = width.div_ceil(64);
        Ok(Self {
            width,
            height,
            words_per_row,
            cells: vec![0; words_per_row * height],
            generation: 0,
        })
    }

    /// Each cell alive independently with probability `density`, drawn
    /// row-major from a ChaCha8 stream seeded with `seed`.
    pub fn random(width: usize, height: usize, density: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&density) {
            return Err(Error::InvalidArgument(format!(
                "density must lie in [0, 1], got {density}"
            )));
        }
        let mut grid = Self::new(width, height)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for y in 0..height {
            for x in 0..width {
                if rng.gen_bool(density) {
                    grid.set(x, y, true);
                }
            }
        }
        Ok(grid)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn bounds(&self) -> Rect {
        Rect::new(0, 0, self.width, self.height)
    }

    /// Out-of-range coordinates read as dead.
    pub fn get(&self, x: i64, y: i64) -> bool {
        if x < 0 || y < 0 || x as usize >= self.width || y as usize >= self.height {
            return false;
        }
        let (x, y) = (x as usize, y as usize);
        self.cells[y * self.words_per_row + x / 64] >> (x % 64) & 1 == 1
    }

    pub fn set(&mut self, x: usize, y: usize, alive: bool) {
        assert!(x < self.width && y < self.height, "({x}, {y}) outside grid");
        let w = &mut self.cells[y * self.words_per_row + x / 64];
        if alive {
            *w |= 1 << (x % 64);
        } else {
            *w &= !(1 << (x % 64));
        }
    }

    pub fn population(&self) -> u64 {
        self.cells.iter().map(|w| u64::from(w.count_ones())).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.iter().all(|&w| w == 0)
    }

    pub fn population_in(&self, rect: Rect) -> u64 {
        let mut n = 0;
        for y in rect.y..rect.bottom().min(self.height) {
            for x in rect.x..rect.right().min(self.width) {
                n += u64::from(self.get(x as i64, y as i64));
            }
        }
        n
    }

    /// Live cells in row-major order.
    pub fn live_cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let wpr = self.words_per_row;
        self.cells.iter().enumerate().flat_map(move |(i, &w)| {
            let (y, base) = (i / wpr, (i % wpr) * 64);
            BitIter(w).map(move |b| (base + b, y))
        })
    }

    /// Tight box around the live cells, `None` when empty.
    pub fn live_bounds(&self) -> Option<Rect> {
        let (mut x0, mut y0, mut x1, mut y1) = (usize::MAX, usize::MAX, 0, 0);
        for (x, y) in self.live_cells() {
            x0 = x0.min(x);
            y0 = y0.min(y);
            x1 = x1.max(x);
            y1 = y1.max(y);
        }
        (x0 != usize::MAX).then(|| Rect::new(x0, y0, x1 - x0 + 1, y1 - y0 + 1))
    }

    /// Copy of `self` with the live cells of `pattern` written at `origin`.
    pub fn place(&self, pattern: &Pattern, origin: (i64, i64)) -> Result<Grid> {
        let mut g = self.clone();
        g.place_mut(pattern, origin)?;
        Ok(g)
    }

    pub fn place_mut(&mut self, pattern: &Pattern, origin: (i64, i64)) -> Result<()> {
        let (ox, oy) = origin;
        let fits = ox >= 0
            && oy >= 0
            && ox as usize + pattern.width() <= self.width
            && oy as usize + pattern.height() <= self.height;
        if !fits {
            return Err(Error::OutOfBounds {
                x: ox,
                y: oy,
                pattern_w: pattern.width(),
                pattern_h: pattern.height(),
                grid_w: self.width,
                grid_h: self.height,
            });
        }
        for &(x, y) in pattern.cells() {
            self.set(ox as usize + x, oy as usize + y, true);
        }
        Ok(())
    }

    /// Successor grid; `self` is left untouched.
    pub fn step(&self, rule: &RuleSpec) -> Grid {
        let mut next = Grid {
            width: self.width,
            height: self.height,
            words_per_row: self.words_per_row,
            cells: vec![0; self.cells.len()],
            generation: self.generation + 1,
        };
        self.step_into(rule, &mut next.cells);
        next
    }

    /// Result of `steps` successive applications of [`Grid::step`].
    pub fn run_for(&self, rule: &RuleSpec, steps: u64) -> Grid {
        let mut g = self.clone();
        g.advance(rule, steps);
        g
    }

    /// In-place evolution, reusing one scratch buffer.
    pub fn advance(&mut self, rule: &RuleSpec, steps: u64) {
        let mut scratch = vec![0u64; self.cells.len()];
        for _ in 0..steps {
            self.step_into(rule, &mut scratch);
            std::mem::swap(&mut self.cells, &mut scratch);
            self.generation += 1;
        }
    }

    /// Advance one generation in place.
    pub fn tick(&mut self, rule: &RuleSpec) {
        self.advance(rule, 1);
    }

    fn step_into(&self, rule: &RuleSpec, out: &mut [u64]) {
        let wpr = self.words_per_row;
        let tail = tail_mask(self.width);
        let kernel = Kernel::new(rule);
        let src = &self.cells;
        let height = self.height;
        let row = |y: usize, dst: &mut [u64]| {
            let above = if y > 0 {
                &src[(y - 1) * wpr..y * wpr]
            } else {
                &[][..]
            };
            let below = if y + 1 < height {
                &src[(y + 1) * wpr..(y + 2) * wpr]
            } else {
                &[][..]
            };
            kernel.row(above, &src[y * wpr..(y + 1) * wpr], below, dst);
            dst[wpr - 1] &= tail;
        };
        if height >= PARALLEL_MIN_ROWS && rayon::current_num_threads() > 1 {
            out.par_chunks_mut(wpr)
                .enumerate()
                .for_each(|(y, dst)| row(y, dst));
        } else {
            out.chunks_mut(wpr)
                .enumerate()
                .for_each(|(y, dst)| row(y, dst));
        }
    }

    /// Record the cells of `window` over the next `steps` generations.
    ///
    /// Sample `t` is the window content after `t + 1` steps; the grid ends
    /// `steps` generations later.
    pub fn record_window(
        &mut self,
        rule: &RuleSpec,
        window: Rect,
        steps: usize,
    ) -> Result<ActivityTrace> {
        if !window.fits_in(self.width, self.height) {
            return Err(Error::InvalidArgument(format!(
                "window {window:?} outside {}x{} grid",
                self.width, self.height
            )));
        }
        if steps == 0 {
            return Err(Error::InvalidArgument("steps must be at least 1".into()));
        }
        let mut samples = vec![0u8; window.area() * steps];
        for t in 0..steps {
            self.tick(rule);
            for (c, (x, y)) in window_cells(window).enumerate() {
                samples[c * steps + t] = u8::from(self.get(x as i64, y as i64));
            }
        }
        Ok(ActivityTrace {
            window,
            steps,
            samples,
        })
    }

    /// Cells of `rect` as a pattern (not normalised: the box is `rect`).
    pub fn extract(&self, rect: Rect) -> Pattern {
        let cells = window_cells(rect)
            .filter(|&(x, y)| self.get(x as i64, y as i64))
            .map(|(x, y)| (x - rect.x, y - rect.y))
            .collect();
        Pattern::with_box(rect.width, rect.height, cells)
    }

    /// Live content as a tight pattern (empty pattern when the grid is empty).
    pub fn to_pattern(&self) -> Pattern {
        match self.live_bounds() {
            Some(b) => self.extract(b),
            None => Pattern::empty(),
        }
    }

    /// Set the generation counter, e.g. after loading a snapshot.
    pub fn with_generation(mut self, generation: u64) -> Self {
        self.generation = generation;
        self
    }

    /// Raw packed rows; bit `x % 64` of word `y * words_per_row + x / 64`.
    pub fn words(&self) -> &[u64] {
        &self.cells
    }

    pub fn words_per_row(&self) -> usize {
        self.words_per_row
    }

    /// Same cell content, ignoring the generation counter.
    pub fn same_cells(&self, other: &Grid) -> bool {
        self.width == other.width && self.height == other.height && self.cells == other.cells
    }
}

fn window_cells(r: Rect) -> impl Iterator<Item = (usize, usize)> {
    (r.y..r.bottom()).flat_map(move |y| (r.x..r.right()).map(move |x| (x, y)))
}

fn tail_mask(width: usize) -> u64 {
    match width % 64 {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

struct BitIter(u64);

impl Iterator for BitIter {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let b = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(b)
    }
}

/// Bit-sliced update for one rule.
struct Kernel {
    birth: u16,
    survival: u16,
}

impl Kernel {
    fn new(rule: &RuleSpec) -> Self {
        Self {
            birth: rule.birth,
            survival: rule.survival,
        }
    }

    #[inline]
    fn row(&self, above: &[u64], cur: &[u64], below: &[u64], out: &mut [u64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.word(above, cur, below, i);
        }
    }

    /// Next state of word `i` of `cur`; an empty `above` or `below` is a
    /// dead row.
    #[inline]
    fn word(&self, above: &[u64], cur: &[u64], below: &[u64], i: usize) -> u64 {
        let n = cur.len();
        let at = |r: &[u64], i: isize| -> u64 {
            if r.is_empty() || i < 0 || i as usize >= n {
                0
            } else {
                r[i as usize]
            }
        };
        let quiet = self.birth & 1 == 0;
        let ii = i as isize;
        let (a, c, b) = (at(above, ii), cur[i], at(below, ii));
        let west = |r: &[u64]| (at(r, ii) << 1) | (at(r, ii - 1) >> 63);
        let east = |r: &[u64]| (at(r, ii) >> 1) | (at(r, ii + 1) << 63);
        let inputs = [
            west(above),
            a,
            east(above),
            west(cur),
            east(cur),
            west(below),
            b,
            east(below),
        ];
        if quiet && c == 0 && inputs.iter().all(|&v| v == 0) {
            return 0;
        }
        let (mut c0, mut c1, mut c2, mut c3) = (0u64, 0u64, 0u64, 0u64);
        for v in inputs {
            let k0 = c0 & v;
            c0 ^= v;
            let k1 = c1 & k0;
            c1 ^= k0;
            let k2 = c2 & k1;
            c2 ^= k1;
            c3 |= k2;
        }
        let eq = |k: u8| -> u64 {
            let bit = |plane: u64, set: bool| if set { plane } else { !plane };
            bit(c0, k & 1 != 0) & bit(c1, k & 2 != 0) & bit(c2, k & 4 != 0) & bit(c3, k & 8 != 0)
        };
        let any = |mask: u16| -> u64 {
            (0..=8u8)
                .filter(|k| mask & (1 << k) != 0)
                .fold(0, |acc, k| acc | eq(k))
        };
        (!c & any(self.birth)) | (c & any(self.survival))
    }
}

/// Steps a grid that is mostly still, recomputing only the words next to a
/// word that changed on the previous step. Gives the same states as
/// [`Grid::tick`]; call [`SparseStepper::reset`] after editing the grid
/// between ticks.
#[derive(Clone, Debug, Default)]
pub struct SparseStepper {
    scratch: Vec<u64>,
    changed: Vec<bool>,
    next_changed: Vec<bool>,
    primed: bool,
}

impl SparseStepper {
    pub fn new() -> Self {
        Self::default()
    }

    /// Forget the change record; the next tick recomputes every word.
    pub fn reset(&mut self) {
        self.primed = false;
    }

    pub fn tick(&mut self, grid: &mut Grid, rule: &RuleSpec) {
        let wpr = grid.words_per_row;
        let len = grid.cells.len();
        if self.scratch.len() != len {
            self.scratch = vec![0; len];
            self.changed = vec![true; len];
            self.next_changed = vec![false; len];
            self.primed = false;
        }
        let kernel = Kernel::new(rule);
        let tail = tail_mask(grid.width);
        let height = grid.height;
        let src = &grid.cells;
        for y in 0..height {
            let above = if y > 0 {
                &src[(y - 1) * wpr..y * wpr]
            } else {
                &[][..]
            };
            let below = if y + 1 < height {
                &src[(y + 1) * wpr..(y + 2) * wpr]
            } else {
                &[][..]
            };
            let cur = &src[y * wpr..(y + 1) * wpr];
            for i in 0..wpr {
                let near = |yy: usize| {
                    let lo = i.saturating_sub(1);
                    let hi = (i + 1).min(wpr - 1);
                    self.changed[yy * wpr + lo..=yy * wpr + hi]
                        .iter()
                        .any(|&c| c)
                };
                let dirty = !self.primed
                    || near(y)
                    || (y > 0 && near(y - 1))
                    || (y + 1 < height && near(y + 1));
                let idx = y * wpr + i;
                let mut w = if dirty {
                    kernel.word(above, cur, below, i)
                } else {
                    cur[i]
                };
                if i == wpr - 1 {
                    w &= tail;
                }
                self.next_changed[idx] = w != cur[i];
                self.scratch[idx] = w;
            }
        }
        std::mem::swap(&mut grid.cells, &mut self.scratch);
        std::mem::swap(&mut self.changed, &mut self.next_changed);
        self.primed = true;
        grid.generation += 1;
    }
}

/// Per-cell binary time series of a window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActivityTrace {
    window: Rect,
    steps: usize,
    samples: Vec<u8>,
}

impl ActivityTrace {
    /// Build a trace directly from per-cell series (one `Vec` per cell,
    /// row-major over `window`).
    pub fn from_series(window: Rect, series: &[Vec<u8>]) -> Result<Self> {
        if series.len() != window.area() {
            return Err(Error::InvalidArgument(format!(
                "{} series for a window of {} cells",
                series.len(),
                window.area()
            )));
        }
        let steps = series.first().map_or(0, Vec::len);
        if series
            .iter()
            .any(|s| s.len() != steps || s.iter().any(|&v| v > 1))
        {
            return Err(Error::InvalidArgument(
                "series must share a length and hold only 0/1".into(),
            ));
        }
        Ok(Self {
            window,
            steps,
            samples: series.concat(),
        })
    }

    pub fn window(&self) -> Rect {
        self.window
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn cell_count(&self) -> usize {
        self.window.area()
    }

    /// Series of the `cell`-th window cell (row-major).
    pub fn series(&self, cell: usize) -> &[u8] {
        &self.samples[cell * self.steps..(cell + 1) * self.steps]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u8]> {
        self.samples.chunks(self.steps.max(1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_step(g: &Grid, rule: &RuleSpec) -> Grid {
        let mut out = Grid::new(g.width(), g.height()).unwrap();
        for y in 0..g.height() as i64 {
            for x in 0..g.width() as i64 {
                let mut n = 0;
                for dy in -1..=1 {
                    for dx in -1..=1 {
                        if (dx, dy) != (0, 0) && g.get(x + dx, y + dy) {
                            n += 1;
                        }
                    }
                }
                if rule.next_state(g.get(x, y), n) {
                    out.set(x as usize, y as usize, true);
                }
            }
        }
        out
    }

    fn block() -> Pattern {
        Pattern::from_rows(&["11", "11"]).unwrap()
    }

    proptest::proptest! {
        #[test]
        fn sparse_stepper_matches_full_steps(
            width in 1usize..200,
            height in 1usize..40,
            density in 0.0f64..0.5,
            seed in 0u64..1000,
            steps in 1usize..40,
        ) {
            let rule = RuleSpec::b2s2345();
            let mut full = Grid::random(width, height, density, seed).unwrap();
            let mut sparse = full.clone();
            let mut stepper = SparseStepper::new();
            for t in 0..steps {
                full.tick(&rule);
                stepper.tick(&mut sparse, &rule);
                proptest::prop_assert_eq!(&full, &sparse, "step {}", t + 1);
                if t == steps / 2 && width > 2 && height > 2 {
                    // an outside edit, announced by reset
                    full.set(width / 2, height / 2, true);
                    sparse.set(width / 2, height / 2, true);
                    stepper.reset();
                }
            }
        }
    }

    #[test]
    fn new_grid_is_dead() {
        let g = Grid::new(3, 3).unwrap();
        assert_eq!(g.population(), 0);
        assert_eq!(g.generation(), 0);
        let big = Grid::new(700, 700).unwrap();
        assert_eq!((big.width(), big.height(), big.population()), (700, 700, 0));
        assert!(matches!(Grid::new(0, 5), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn place_writes_and_bounds_checks() {
        let g = Grid::new(700, 700).unwrap();
        assert_eq!(g.place(&block(), (349, 349)).unwrap().population(), 4);
        let l = Pattern::from_rows(&["1000", "1111"]).unwrap();
        assert_eq!(g.place(&l, (10, 10)).unwrap().population(), 5);
        let sq = Pattern::from_rows(&["111", "111", "111"]).unwrap();
        assert!(matches!(
            g.place(&sq, (699, 699)),
            Err(Error::OutOfBounds { .. })
        ));
        assert!(g.place(&sq, (-1, 0)).is_err());
    }

    #[test]
    fn step_small_cases() {
        let rule = RuleSpec::b2s2345();
        let empty = Grid::new(10, 10).unwrap();
        assert!(empty.step(&rule).is_empty());

        let mut one = empty.clone();
        one.set(5, 5, true);
        assert!(one.step(&rule).is_empty());

        let b = empty.place(&block(), (4, 4)).unwrap();
        let next = b.step(&rule);
        assert_eq!(next.population(), 12);
        assert_eq!(next.generation(), 1);
        // the input is untouched
        assert_eq!(b.population(), 4);
        assert_eq!(b.generation(), 0);
    }

    #[test]
    fn packed_kernel_matches_naive_across_word_boundaries() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for &(w, h) in &[(1, 1), (63, 5), (64, 7), (65, 9), (130, 17), (200, 3)] {
            for rule in [
                RuleSpec::b2s2345(),
                RuleSpec::conway(),
                RuleSpec::new(&[0, 1], &[8]).unwrap(),
            ] {
                let mut g = Grid::new(w, h).unwrap();
                for y in 0..h {
                    for x in 0..w {
                        g.set(x, y, rng.gen_bool(0.35));
                    }
                }
                for _ in 0..4 {
                    let fast = g.step(&rule);
                    assert!(fast.same_cells(&naive_step(&g, &rule)), "{w}x{h} {rule}");
                    g = fast;
                }
            }
        }
    }

    #[test]
    fn run_for_zero_is_identity() {
        let g = Grid::new(20, 20).unwrap().place(&block(), (3, 3)).unwrap();
        assert_eq!(g.run_for(&RuleSpec::b2s2345(), 0), g);
    }

    #[test]
    fn rule_strings() {
        let r: RuleSpec = "B2/S2345".parse().unwrap();
        assert_eq!(r, RuleSpec::b2s2345());
        assert_eq!(r.to_string(), "B2/S2345");
        assert_eq!("s2345/b2".parse::<RuleSpec>().unwrap(), r);
        assert_eq!("2345/2".parse::<RuleSpec>().unwrap(), r);
        assert_eq!("B/S".parse::<RuleSpec>().unwrap().to_string(), "B/S");
        assert!("B9/S1".parse::<RuleSpec>().is_err());
        assert!("B2S23".parse::<RuleSpec>().is_err());
        assert!(RuleSpec::new(&[9], &[]).is_err());
    }

    #[test]
    fn record_window_shapes_and_errors() {
        let rule = RuleSpec::b2s2345();
        let mut g = Grid::new(30, 30).unwrap();
        let tr = g.record_window(&rule, Rect::new(2, 2, 5, 4), 8).unwrap();
        assert_eq!(tr.cell_count(), 20);
        assert!(tr.iter().all(|s| s.len() == 8 && s.iter().all(|&v| v == 0)));
        assert_eq!(g.generation(), 8);
        assert!(g.record_window(&rule, Rect::new(28, 0, 5, 5), 4).is_err());
        assert!(g.record_window(&rule, Rect::new(0, 0, 5, 5), 0).is_err());

        // plus-shaped still life stays lit
        let plus = Pattern::from_rows(&["010", "111", "010"]).unwrap();
        let mut g = Grid::new(30, 30).unwrap().place(&plus, (10, 10)).unwrap();
        let tr = g.record_window(&rule, Rect::new(10, 10, 3, 3), 16).unwrap();
        let lit: Vec<usize> = (0..9)
            .filter(|&c| tr.series(c).iter().all(|&v| v == 1))
            .collect();
        let dark = (0..9)
            .filter(|&c| tr.series(c).iter().all(|&v| v == 0))
            .count();
        assert_eq!(lit, vec![1, 3, 4, 5, 7]);
        assert_eq!(dark, 4);
    }

    #[test]
    fn live_bounds_and_cells() {
        let mut g = Grid::new(100, 4).unwrap();
        g.set(70, 1, true);
        g.set(3, 2, true);
        assert_eq!(g.live_cells().collect::<Vec<_>>(), vec![(70, 1), (3, 2)]);
        assert_eq!(g.live_bounds(), Some(Rect::new(3, 1, 68, 2)));
        assert_eq!(Grid::new(4, 4).unwrap().live_bounds(), None);
    }
}
