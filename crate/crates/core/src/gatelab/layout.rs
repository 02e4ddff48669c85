//! Gate layouts: a still background of blocks, particle injection sites and an
//! output window, plus evaluation against the logical majority function.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{Grid, Rect, RuleSpec, SparseStepper};
use crate::error::{Error, Result};
use crate::gatelab::channel::{Axis, ChannelSpec};
use crate::gatelab::classify::{classify_output, Classification, OutputWindow, SIGNAL_THRESHOLD};
use crate::gatelab::discovery::{Heading, PrimitiveCatalog};
use crate::pattern::Pattern;
use crate::rle::{emit_rle, parse_rle};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateKind {
    W3,
    W5,
    Cascade3,
}

impl GateKind {
    pub const ALL: [GateKind; 3] = [GateKind::W3, GateKind::W5, GateKind::Cascade3];

    pub fn inputs(self) -> usize {
        match self {
            GateKind::W3 => 3,
            GateKind::W5 => 5,
            GateKind::Cascade3 => 9,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::W3 => "w3",
            GateKind::W5 => "w5",
            GateKind::Cascade3 => "cascade3",
        }
    }
}

impl std::fmt::Display for GateKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for GateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "w3" => Ok(GateKind::W3),
            "w5" => Ok(GateKind::W5),
            "cascade3" | "cascade" => Ok(GateKind::Cascade3),
            _ => Err(Error::InvalidArgument(format!("unknown gate kind {s:?}"))),
        }
    }
}

/// Blocks placed on a square lattice: block `(row, col)` has its top-left
/// corner at `(margin + pitch·col, margin + pitch·row)`.
///
/// Clearing a run of `n` lattice sites in a row opens a channel whose
/// interior is `n·pitch + spacing` long and `pitch + spacing` wide.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockLattice {
    pub margin: usize,
    pub block: usize,
    pub spacing: usize,
    /// `#` for a block, `.` for a cleared site.
    pub rows: Vec<String>,
}

impl BlockLattice {
    /// A lattice filled with blocks.
    pub fn filled(rows: usize, cols: usize, block: usize, spacing: usize, margin: usize) -> Self {
        Self {
            margin,
            block,
            spacing,
            rows: vec!["#".repeat(cols); rows],
        }
    }

    pub fn pitch(&self) -> usize {
        self.block + self.spacing
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn col_count(&self) -> usize {
        self.rows.first().map_or(0, String::len)
    }

    pub fn is_block(&self, row: usize, col: usize) -> bool {
        self.rows
            .get(row)
            .and_then(|r| r.as_bytes().get(col))
            .is_some_and(|&c| c == b'#')
    }

    pub fn set(&mut self, row: usize, col: usize, block: bool) {
        let mut bytes = std::mem::take(&mut self.rows[row]).into_bytes();
        bytes[col] = if block { b'#' } else { b'.' };
        self.rows[row] = String::from_utf8(bytes).expect("lattice rows are ASCII");
    }

    /// Clear `len` sites of `row` starting at `col`.
    pub fn clear_row(&mut self, row: usize, col: usize, len: usize) {
        for c in col..col + len {
            self.set(row, c, false);
        }
    }

    pub fn clear_col(&mut self, col: usize, row: usize, len: usize) {
        for r in row..row + len {
            self.set(r, col, false);
        }
    }

    /// Top-left corner of the block at `(row, col)`.
    pub fn site(&self, row: usize, col: usize) -> (usize, usize) {
        (
            self.margin + self.pitch() * col,
            self.margin + self.pitch() * row,
        )
    }

    pub fn width(&self) -> usize {
        2 * self.margin + self.pitch() * self.col_count() - self.spacing
    }

    pub fn height(&self) -> usize {
        2 * self.margin + self.pitch() * self.row_count() - self.spacing
    }

    /// Interior of the horizontal channel cut along lattice `row`, covering
    /// columns `col..col + len`.
    pub fn row_interior(&self, row: usize, col: usize, len: usize) -> Rect {
        let (x, y) = self.site(row, col);
        Rect::new(
            x - self.spacing,
            y - self.spacing,
            len * self.pitch() + self.spacing,
            self.pitch() + self.spacing,
        )
    }

    pub fn col_interior(&self, col: usize, row: usize, len: usize) -> Rect {
        let r = self.row_interior(col, row, len);
        Rect::new(r.y, r.x, r.height, r.width)
    }

    /// The background pattern in a box of `width()`×`height()`.
    pub fn render(&self, block: &Pattern) -> Result<Pattern> {
        if block.width() != self.block || block.height() != self.block {
            return Err(Error::InvalidGeometry(format!(
                "lattice expects a {0}x{0} block, got {1}x{2}",
                self.block,
                block.width(),
                block.height()
            )));
        }
        let mut cells = Vec::new();
        for (r, row) in self.rows.iter().enumerate() {
            if row.len() != self.col_count() {
                return Err(Error::InvalidGeometry(format!(
                    "lattice row {r} has ragged length"
                )));
            }
            for (c, ch) in row.bytes().enumerate() {
                match ch {
                    b'#' => {
                        let (x, y) = self.site(r, c);
                        cells.extend(block.cells().iter().map(|&(bx, by)| (bx + x, by + y)));
                    }
                    b'.' => {}
                    other => {
                        return Err(Error::InvalidGeometry(format!(
                            "lattice site ({r}, {c}) holds {:?}",
                            other as char
                        )))
                    }
                }
            }
        }
        Ok(Pattern::with_box(self.width(), self.height(), cells))
    }
}

/// A straight channel and where its interior sits in the arena.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlacedChannel {
    pub spec: ChannelSpec,
    pub interior: Rect,
    /// Extra length inserted only to retard the wave.
    #[serde(default)]
    pub delay: bool,
}

/// Where the particle for one input starts.
///
/// `origin` is the top-left of the particle box for bit 0 at phase 0. Each
/// unit of `phase` moves the start one cell back against `heading`, so the
/// particle arrives one step later.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InjectionSite {
    pub origin: (i64, i64),
    pub heading: Heading,
    pub bit1_offset: (i64, i64),
    pub phase: u32,
    /// Index into the layout's channel list.
    pub channel: usize,
}

/// A particle placement produced by [`encode_input`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Placement {
    pub pattern: Pattern,
    pub origin: (i64, i64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct GateLayout {
    pub kind: GateKind,
    pub width: usize,
    pub height: usize,
    pub channels: Vec<PlacedChannel>,
    pub injection_sites: Vec<InjectionSite>,
    pub output_window: OutputWindow,
    pub deadline: u64,
    pub particle: Pattern,
    pub background: Pattern,
}

/// On-disk form: the background travels as embedded RLE.
#[derive(Serialize, Deserialize)]
struct LayoutFile {
    kind: GateKind,
    width: usize,
    height: usize,
    channels: Vec<PlacedChannel>,
    injection_sites: Vec<InjectionSite>,
    output_window: OutputWindow,
    deadline: u64,
    /// Particle heading east, as rows of `.`/`O`.
    particle: Vec<String>,
    background_rle: String,
}

impl GateLayout {
    pub fn inputs(&self) -> usize {
        self.injection_sites.len()
    }

    pub fn delay_count(&self) -> usize {
        self.channels.iter().filter(|c| c.delay).count()
    }

    /// The arena with only the background in place.
    pub fn empty_grid(&self) -> Result<Grid> {
        Grid::new(self.width, self.height)?.place(&self.background, (0, 0))
    }

    /// One step leaves the empty layout unchanged.
    pub fn is_still(&self, rule: &RuleSpec) -> Result<bool> {
        let g = self.empty_grid()?;
        Ok(g.step(rule).same_cells(&g))
    }

    /// Check the structural invariants: sites inside their channels, window
    /// inside the arena, one site per input.
    pub fn validate(&self) -> Result<()> {
        if self.injection_sites.len() != self.kind.inputs() {
            return Err(Error::Layout(format!(
                "{} layout has {} injection sites, expected {}",
                self.kind,
                self.injection_sites.len(),
                self.kind.inputs()
            )));
        }
        if !self.output_window.rect.fits_in(self.width, self.height) {
            return Err(Error::Layout("output window outside the arena".into()));
        }
        for (i, site) in self.injection_sites.iter().enumerate() {
            let ch = self.channels.get(site.channel).ok_or_else(|| {
                Error::Layout(format!("input {i} names missing channel {}", site.channel))
            })?;
            for bit in [0, 1] {
                let p = encode_input(self, i, bit)?;
                let r = ch.interior;
                let inside = p.pattern.cells().iter().all(|&(x, y)| {
                    let (cx, cy) = (p.origin.0 + x as i64, p.origin.1 + y as i64);
                    cx >= r.x as i64
                        && cy >= r.y as i64
                        && cx < r.right() as i64
                        && cy < r.bottom() as i64
                });
                if !inside {
                    return Err(Error::Layout(format!(
                        "input {i} bit {bit} lies outside its channel"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self, rule: &RuleSpec) -> Result<String> {
        let file = LayoutFile {
            kind: self.kind,
            width: self.width,
            height: self.height,
            channels: self.channels.clone(),
            injection_sites: self.injection_sites.clone(),
            output_window: self.output_window,
            deadline: self.deadline,
            particle: self.particle.to_rows(),
            background_rle: emit_rle(&self.background, rule),
        };
        serde_json::to_string_pretty(&file).map_err(|e| Error::Layout(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: LayoutFile =
            serde_json::from_str(text).map_err(|e| Error::Layout(e.to_string()))?;
        let doc = parse_rle(&file.background_rle)?;
        // RLE drops trailing dead space; restore the arena box.
        let background = Pattern::with_box(file.width, file.height, doc.pattern.cells().to_vec());
        let layout = Self {
            kind: file.kind,
            width: file.width,
            height: file.height,
            channels: file.channels,
            injection_sites: file.injection_sites,
            output_window: file.output_window,
            deadline: file.deadline,
            particle: Pattern::from_rows(&file.particle)?,
            background,
        };
        layout.validate()?;
        Ok(layout)
    }
}

/// Where the particle for `input` goes when it carries `bit`.
pub fn encode_input(layout: &GateLayout, input: usize, bit: u8) -> Result<Placement> {
    let site = layout.injection_sites.get(input).ok_or_else(|| {
        Error::InvalidArgument(format!(
            "input index {input} out of range for {} inputs",
            layout.injection_sites.len()
        ))
    })?;
    if bit > 1 {
        return Err(Error::InvalidArgument(format!(
            "bit must be 0 or 1, got {bit}"
        )));
    }
    let (dx, dy) = site.heading.delta();
    let back = i64::from(site.phase);
    let (mut x, mut y) = (site.origin.0 - dx * back, site.origin.1 - dy * back);
    if bit == 1 {
        x += site.bit1_offset.0;
        y += site.bit1_offset.1;
    }
    Ok(Placement {
        pattern: orient_particle(&layout.particle, site.heading),
        origin: (x, y),
    })
}

/// Rotate an east-heading particle to `heading`.
pub fn orient_particle(east: &Pattern, heading: Heading) -> Pattern {
    use crate::pattern::Transform;
    match heading {
        Heading::East => east.clone(),
        Heading::West => east.transform(Transform::MirrorY),
        Heading::South => east.transform(Transform::Transpose),
        Heading::North => east.transform(Transform::AntiTranspose),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateResult {
    pub output: Classification,
    pub steps_used: u64,
    pub final_population: u64,
}

impl GateResult {
    pub fn bit(&self) -> Option<u8> {
        self.output.bit()
    }
}

/// Run the gate on `inputs` until the output window decides or the deadline
/// passes.
///
/// The probe starts on the first step the window holds at least
/// [`SIGNAL_THRESHOLD`] live cells and covers that frame and the following
/// ones; a probe that would overrun the deadline counts as no signal.
pub fn evaluate_gate(layout: &GateLayout, inputs: &[u8], rule: &RuleSpec) -> Result<GateResult> {
    if inputs.len() != layout.inputs() {
        return Err(Error::InvalidArgument(format!(
            "{} gate takes {} inputs, got {}",
            layout.kind,
            layout.inputs(),
            inputs.len()
        )));
    }
    let mut grid = layout.empty_grid()?;
    for (i, &bit) in inputs.iter().enumerate() {
        let p = encode_input(layout, i, bit)?;
        grid.place_mut(&p.pattern, p.origin)?;
    }
    let window = &layout.output_window;
    let probe = crate::gatelab::classify::PROBE_STEPS as u64;
    let mut previous = grid.clone();
    let mut stepper = SparseStepper::new();
    while grid.generation() < layout.deadline {
        previous.clone_from(&grid);
        stepper.tick(&mut grid, rule);
        if grid.population_in(window.rect) >= SIGNAL_THRESHOLD {
            if grid.generation() - 1 + probe > layout.deadline {
                break;
            }
            let output = classify_output(&previous, window, rule)?;
            let steps_used = previous.generation() + probe;
            let final_population = previous.run_for(rule, probe).population();
            return Ok(GateResult {
                output,
                steps_used,
                final_population,
            });
        }
    }
    Ok(GateResult {
        output: Classification::NoSignal,
        steps_used: grid.generation(),
        final_population: grid.population(),
    })
}

/// The most frequent bit; ties (even length) resolve to 0.
pub fn majority(bits: &[u8]) -> u8 {
    let ones = bits.iter().filter(|&&b| b != 0).count();
    u8::from(2 * ones > bits.len())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruthRow {
    pub inputs: Vec<u8>,
    pub expected: u8,
    pub result: GateResult,
}

impl TruthRow {
    pub fn pass(&self) -> bool {
        self.result.bit() == Some(self.expected)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruthTable {
    pub kind: GateKind,
    pub rows: Vec<TruthRow>,
}

impl TruthTable {
    pub fn passed(&self) -> usize {
        self.rows.iter().filter(|r| r.pass()).count()
    }

    pub fn all_pass(&self) -> bool {
        self.passed() == self.rows.len()
    }

    pub fn max_steps(&self) -> u64 {
        self.rows
            .iter()
            .map(|r| r.result.steps_used)
            .max()
            .unwrap_or(0)
    }
}

/// Input vectors of length `n` in counting order, most significant first.
pub fn input_rows(n: usize) -> Vec<Vec<u8>> {
    (0..1u32 << n)
        .map(|v| (0..n).map(|k| ((v >> (n - 1 - k)) & 1) as u8).collect())
        .collect()
}

/// Expected output of a layout: plain majority, or for a cascade the
/// majority of the three sub-gate majorities.
pub fn reference(kind: GateKind, inputs: &[u8]) -> u8 {
    match kind {
        GateKind::W3 | GateKind::W5 => majority(inputs),
        GateKind::Cascade3 => {
            let subs: Vec<u8> = inputs.chunks(3).map(majority).collect();
            majority(&subs)
        }
    }
}

/// Evaluate the given rows in parallel; each row owns its grid.
pub fn truth_table_rows(
    layout: &GateLayout,
    rows: Vec<Vec<u8>>,
    rule: &RuleSpec,
) -> Result<TruthTable> {
    let results: Result<Vec<TruthRow>> = rows
        .into_par_iter()
        .map(|inputs| {
            let result = evaluate_gate(layout, &inputs, rule)?;
            Ok(TruthRow {
                expected: reference(layout.kind, &inputs),
                inputs,
                result,
            })
        })
        .collect();
    Ok(TruthTable {
        kind: layout.kind,
        rows: results?,
    })
}

/// Every input row of the layout against its reference.
pub fn truth_table(layout: &GateLayout, rule: &RuleSpec) -> Result<TruthTable> {
    truth_table_rows(layout, input_rows(layout.inputs()), rule)
}

/// Catalog block and east-heading particle, checked for lattice use.
pub(crate) fn lattice_parts(
    catalog: &PrimitiveCatalog,
    rule: &RuleSpec,
) -> Result<(Pattern, Pattern)> {
    let block = catalog.indestructible.clone();
    if block.width() != block.height() {
        return Err(Error::InvalidGeometry(
            "indestructible block is not square".into(),
        ));
    }
    let east = catalog.particle_heading(Heading::East, rule)?;
    Ok((block, east))
}

/// A channel record for lattice row `row`, columns `col..col + len`.
pub(crate) fn row_channel(
    lattice: &BlockLattice,
    row: usize,
    col: usize,
    len: usize,
    delay: bool,
) -> PlacedChannel {
    let interior = lattice.row_interior(row, col, len);
    PlacedChannel {
        spec: ChannelSpec {
            axis: Axis::Horizontal,
            length: interior.width,
            interior_width: interior.height,
            wall_spacing: lattice.spacing,
        },
        interior,
        delay,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn majority_ignores_input_order(
            (bits, order) in prop_oneof![Just(3usize), Just(5)]
                .prop_flat_map(|n| (proptest::collection::vec(0u8..2, n), Just((0..n).collect::<Vec<_>>()).prop_shuffle()))
        ) {
            let permuted: Vec<u8> = order.iter().map(|&i| bits[i]).collect();
            prop_assert_eq!(majority(&bits), majority(&permuted));
            let ones = bits.iter().filter(|&&b| b == 1).count();
            prop_assert_eq!(majority(&bits) == 1, 2 * ones > bits.len());
        }
    }

    #[test]
    fn majority_reference() {
        assert_eq!(majority(&[1, 1, 0, 1, 0]), 1);
        assert_eq!(majority(&[0, 1, 0, 0, 0]), 0);
        assert_eq!(majority(&[1, 0, 1]), 1);
        assert_eq!(
            reference(GateKind::Cascade3, &[1, 0, 1, 1, 0, 0, 0, 1, 1]),
            1
        );
        assert_eq!(
            reference(GateKind::Cascade3, &[1, 0, 0, 1, 0, 0, 0, 1, 1]),
            0
        );
    }

    #[test]
    fn rows_count_up() {
        let rows = input_rows(3);
        assert_eq!(rows.len(), 8);
        assert_eq!(rows[0], vec![0, 0, 0]);
        assert_eq!(rows[5], vec![1, 0, 1]);
    }

    #[test]
    fn lattice_geometry() {
        let mut l = BlockLattice::filled(12, 18, 6, 2, 4);
        assert_eq!((l.width(), l.height()), (150, 102));
        l.clear_row(3, 1, 9);
        let r = l.row_interior(3, 1, 9);
        assert_eq!((r.width, r.height), (74, 10));
        // The interior is bounded by blocks on both sides.
        assert!(l.is_block(2, 4) && l.is_block(4, 4) && !l.is_block(3, 4));
        let c = l.col_interior(5, 2, 3);
        assert_eq!((c.x, c.y, c.width, c.height), (42, 18, 10, 26));
    }
}
