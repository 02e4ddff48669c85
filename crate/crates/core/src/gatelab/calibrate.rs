//! Particle calibration for the majority gates and the layouts built from it.
//!
//! A gate is a fixed junction template (a patch of the block lattice) fed by
//! capped input channels. A particle fired west into the cap ignites the
//! input's wave; its axial start sets the launch phase and its lateral
//! offset the bit. Calibration searches those particle parameters.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::engine::{Rect, RuleSpec};
use crate::error::{Error, Result};
use crate::gatelab::channel::Axis;
use crate::gatelab::classify::OutputWindow;
use crate::gatelab::discovery::{Heading, PrimitiveCatalog};
use crate::gatelab::layout::{
    evaluate_gate, input_rows, lattice_parts, reference, row_channel, BlockLattice, GateKind,
    GateLayout, InjectionSite, PlacedChannel,
};
use crate::gatelab::templates;
use crate::pattern::Pattern;

/// Dead cells between blocks of the lattice.
pub const LATTICE_SPACING: usize = 2;
/// Dead border around the outermost blocks.
pub const LATTICE_MARGIN: usize = 4;

/// Steps within which every truth-table row must be decided.
pub const GATE_DEADLINE: u64 = 250;
/// Deadline for the cascade, whose final stage waits on three sub-gates.
pub const CASCADE_DEADLINE: u64 = 600;
/// Axial length of one wave period; delays come in whole periods.
pub const WAVE_PERIOD: usize = 16;

/// A junction found by search, with the frame that feeds it.
///
/// Lattice columns run: the cap column, `input_sites` cleared input sites,
/// the junction columns, `output_sites` cleared output sites, and a closing
/// border column.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GateTemplate {
    pub kind: GateKind,
    pub rows: usize,
    /// Lattice row of each input channel, top to bottom.
    pub input_rows: Vec<usize>,
    pub output_row: usize,
    /// Junction patch for lattice rows `1..rows - 1`; `.` clears a site.
    pub junction: Vec<String>,
    pub output_sites: usize,
    /// Particle start at phase 0, in cells east of the channel's first
    /// cleared site, per input.
    pub base_start: Vec<i64>,
    /// Input lengths (in sites) the junction was tuned for.
    pub input_sites: Vec<usize>,
}

fn patch_cols(patch: &[String]) -> usize {
    patch.first().map_or(0, String::len)
}

impl GateTemplate {
    pub fn junction_cols(&self) -> usize {
        patch_cols(&self.junction)
    }

    pub fn cols(&self, input_sites: usize) -> usize {
        1 + input_sites + self.junction_cols() + self.output_sites + 1
    }
}

/// Three copies of a three-input gate stacked `stride` lattice rows apart,
/// their outputs running east into a final junction.
///
/// A sub-gate delayed by `k` sits `k` wave periods further west, so its
/// output channel is that much longer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CascadeTemplate {
    pub gate: GateTemplate,
    pub stride: usize,
    /// Output sites of an undelayed sub-gate before the final junction.
    pub lead_sites: usize,
    /// Largest delay, in wave periods.
    pub max_delay: u32,
    /// Final junction patch for lattice rows `1..rows - 1`.
    pub junction: Vec<String>,
    pub output_row: usize,
    pub output_sites: usize,
}

impl CascadeTemplate {
    pub fn rows(&self) -> usize {
        2 * self.stride + self.gate.rows
    }
}

/// Particle parameters of one gate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateParams {
    /// Interior length of every input channel, in cells.
    pub input_length: usize,
    /// Lateral bit-1 offset per input; negative is up (toward smaller y).
    pub offsets: Vec<i64>,
    /// Launch phase per input, in steps.
    pub phases: Vec<u32>,
    /// Extra output length per cascade sub-gate, in wave periods.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub delays: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchSpace {
    /// Tried in this order.
    pub offsets: Vec<i64>,
    pub phases: Vec<u32>,
    /// Input channel interior lengths in cells.
    pub input_lengths: Vec<usize>,
}

impl Default for SearchSpace {
    fn default() -> Self {
        Self {
            // magnitude 1 then 2, up before down
            offsets: vec![-1, 1, -2, 2],
            phases: (0..16).collect(),
            input_lengths: (66..=78).step_by(2).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CandidateStatus {
    Pass,
    Fail,
    /// The empty layout moved.
    NotStill,
    /// The input length is not a whole number of lattice sites.
    Unrealizable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateRecord {
    pub input_length: usize,
    pub offsets: Vec<i64>,
    pub phases: Vec<u32>,
    pub delays: Vec<u32>,
    /// Leading truth-table rows that passed before the first failure.
    pub rows_passed: usize,
    /// Largest decision step among the rows evaluated.
    pub steps_used: u64,
    pub status: CandidateStatus,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CalibrationLog {
    pub records: Vec<CandidateRecord>,
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(" ")
}

impl CalibrationLog {
    pub fn tried(&self) -> usize {
        self.records.len()
    }

    pub fn to_csv(&self) -> String {
        let mut s =
            String::from("input_length,offsets,phases,delays,rows_passed,steps_used,status\n");
        for r in &self.records {
            let status = match r.status {
                CandidateStatus::Pass => "pass",
                CandidateStatus::Fail => "fail",
                CandidateStatus::NotStill => "not-still",
                CandidateStatus::Unrealizable => "unrealizable",
            };
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{status}",
                r.input_length,
                join(&r.offsets),
                join(&r.phases),
                join(&r.delays),
                r.rows_passed,
                r.steps_used
            );
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub kind: GateKind,
    pub params: GateParams,
    /// Candidates examined up to and including the passing one.
    pub tried: usize,
    #[serde(skip)]
    pub log: CalibrationLog,
}

impl CalibrationResult {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Layout(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Layout(e.to_string()))
    }

    pub fn log_csv(&self) -> String {
        self.log.to_csv()
    }

    pub fn describe(&self) -> String {
        format!(
            "{} input length {}, offsets [{}], phases [{}], delays [{}]",
            self.kind,
            self.params.input_length,
            join(&self.params.offsets),
            join(&self.params.phases),
            join(&self.params.delays)
        )
    }
}

/// Input sites for an interior length, if the lattice can realise it.
fn sites_for_length(length: usize) -> Option<usize> {
    let pitch = 6 + LATTICE_SPACING;
    (length >= pitch + LATTICE_SPACING && (length - LATTICE_SPACING).is_multiple_of(pitch))
        .then(|| (length - LATTICE_SPACING) / pitch)
}

fn input_sites_for(params: &GateParams) -> Result<usize> {
    sites_for_length(params.input_length).ok_or_else(|| {
        Error::InvalidGeometry(format!(
            "input length {} is not a whole number of lattice sites",
            params.input_length
        ))
    })
}

/// Clear `template`'s junction and input channels into `lattice`, with its
/// top border on row `row0` and its cap on column `col0`. Returns the first
/// column east of the junction.
#[allow(clippy::too_many_arguments)]
fn place_gate(
    lattice: &mut BlockLattice,
    template: &GateTemplate,
    row0: usize,
    col0: usize,
    input_sites: usize,
    offsets: &[i64],
    phases: &[u32],
    channels: &mut Vec<PlacedChannel>,
    sites: &mut Vec<InjectionSite>,
) -> usize {
    let first = col0 + 1;
    for (i, row) in template.junction.iter().enumerate() {
        for (j, c) in row.bytes().enumerate() {
            if c == b'.' {
                lattice.set(row0 + i + 1, first + input_sites + j, false);
            }
        }
    }
    for (k, &row) in template.input_rows.iter().enumerate() {
        let row = row0 + row;
        lattice.clear_row(row, first, input_sites);
        channels.push(row_channel(lattice, row, first, input_sites, false));
        let (x, y) = lattice.site(row, first);
        sites.push(InjectionSite {
            origin: (x as i64 - 2 + template.base_start[k], y as i64 + 1),
            heading: Heading::West,
            bit1_offset: (0, offsets[k]),
            phase: phases[k],
            channel: channels.len() - 1,
        });
    }
    first + input_sites + template.junction_cols()
}

/// Finish a layout whose last channel is the output.
fn finish(
    kind: GateKind,
    lattice: &BlockLattice,
    parts: (Pattern, Pattern),
    channels: Vec<PlacedChannel>,
    injection_sites: Vec<InjectionSite>,
    deadline: u64,
) -> Result<GateLayout> {
    let interior = channels.last().expect("output channel").interior;
    // The last two lattice pitches of the output channel.
    let probe_len = 2 * lattice.pitch();
    let rect = Rect::new(
        interior.right() - probe_len,
        interior.y,
        probe_len,
        interior.height,
    );
    let (block, east) = parts;
    let layout = GateLayout {
        kind,
        width: lattice.width(),
        height: lattice.height(),
        channels,
        injection_sites,
        output_window: OutputWindow {
            rect,
            axis: Axis::Horizontal,
        },
        deadline,
        particle: east,
        background: lattice.render(&block)?,
    };
    layout.validate()?;
    Ok(layout)
}

fn check_arity(kind: GateKind, n: usize, params: &GateParams) -> Result<()> {
    if params.offsets.len() != n || params.phases.len() != n {
        return Err(Error::InvalidArgument(format!(
            "{kind} takes {n} inputs, parameters give {} offsets and {} phases",
            params.offsets.len(),
            params.phases.len()
        )));
    }
    Ok(())
}

/// Lay out `template` with the given particle parameters.
pub fn build_from_template(
    template: &GateTemplate,
    params: &GateParams,
    catalog: &PrimitiveCatalog,
    rule: &RuleSpec,
) -> Result<GateLayout> {
    check_arity(template.kind, template.input_rows.len(), params)?;
    let input_sites = input_sites_for(params)?;
    let parts = lattice_parts(catalog, rule)?;
    let cols = template.cols(input_sites);
    let mut lattice = BlockLattice::filled(
        template.rows,
        cols,
        parts.0.width(),
        LATTICE_SPACING,
        LATTICE_MARGIN,
    );
    let mut channels = Vec::new();
    let mut sites = Vec::new();
    let out_col = place_gate(
        &mut lattice,
        template,
        0,
        0,
        input_sites,
        &params.offsets,
        &params.phases,
        &mut channels,
        &mut sites,
    );
    lattice.clear_row(template.output_row, out_col, template.output_sites);
    channels.push(row_channel(
        &lattice,
        template.output_row,
        out_col,
        template.output_sites,
        false,
    ));
    finish(
        template.kind,
        &lattice,
        parts,
        channels,
        sites,
        GATE_DEADLINE,
    )
}

/// Lay out a cascade. `params` holds nine offsets and phases, top sub-gate
/// first, and one delay per sub-gate.
pub fn build_cascade(
    template: &CascadeTemplate,
    params: &GateParams,
    catalog: &PrimitiveCatalog,
    rule: &RuleSpec,
) -> Result<GateLayout> {
    if template.junction.is_empty() {
        return Err(Error::NoJunction(GateKind::Cascade3.to_string()));
    }
    let n = template.gate.input_rows.len();
    check_arity(GateKind::Cascade3, 3 * n, params)?;
    if params.delays.len() != 3 || params.delays.iter().any(|&d| d > template.max_delay) {
        return Err(Error::InvalidArgument(format!(
            "cascade needs three delays of at most {}, got {:?}",
            template.max_delay, params.delays
        )));
    }
    let input_sites = input_sites_for(params)?;
    let parts = lattice_parts(catalog, rule)?;
    let pitch = parts.0.width() + LATTICE_SPACING;
    let period_sites = WAVE_PERIOD / pitch;
    let shift = template.max_delay as usize * period_sites;
    let junction_col =
        1 + shift + input_sites + template.gate.junction_cols() + template.lead_sites;
    let cols = junction_col + patch_cols(&template.junction) + template.output_sites + 1;
    let mut lattice = BlockLattice::filled(
        template.rows(),
        cols,
        parts.0.width(),
        LATTICE_SPACING,
        LATTICE_MARGIN,
    );
    for (i, row) in template.junction.iter().enumerate() {
        for (j, c) in row.bytes().enumerate() {
            if c == b'.' {
                lattice.set(i + 1, junction_col + j, false);
            }
        }
    }
    let mut channels = Vec::new();
    let mut sites = Vec::new();
    for (g, &delay) in params.delays.iter().enumerate() {
        let row0 = g * template.stride;
        let col0 = shift - delay as usize * period_sites;
        let range = g * n..(g + 1) * n;
        let out_col = place_gate(
            &mut lattice,
            &template.gate,
            row0,
            col0,
            input_sites,
            &params.offsets[range.clone()],
            &params.phases[range],
            &mut channels,
            &mut sites,
        );
        let row = row0 + template.gate.output_row;
        lattice.clear_row(row, out_col, junction_col - out_col);
        channels.push(row_channel(
            &lattice,
            row,
            out_col,
            junction_col - out_col,
            delay > 0,
        ));
    }
    let out_col = junction_col + patch_cols(&template.junction);
    lattice.clear_row(template.output_row, out_col, template.output_sites);
    channels.push(row_channel(
        &lattice,
        template.output_row,
        out_col,
        template.output_sites,
        false,
    ));
    finish(
        GateKind::Cascade3,
        &lattice,
        parts,
        channels,
        sites,
        CASCADE_DEADLINE,
    )
}

/// Leading rows passed, largest steps used, and whether all rows passed.
fn score_rows(
    layout: &GateLayout,
    rows: &[Vec<u8>],
    rule: &RuleSpec,
) -> Result<(usize, u64, bool)> {
    let mut passed = 0;
    let mut steps = 0;
    for inputs in rows {
        let r = evaluate_gate(layout, inputs, rule)?;
        steps = steps.max(r.steps_used);
        if r.bit() != Some(reference(layout.kind, inputs)) {
            return Ok((passed, steps, false));
        }
        passed += 1;
    }
    Ok((passed, steps, true))
}

/// Every tuple over `choices` of length `n`, first position slowest.
fn tuples<T: Copy>(choices: &[T], n: usize) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                choices.iter().map(move |&c| {
                    let mut v = prefix.clone();
                    v.push(c);
                    v
                })
            })
            .collect();
    }
    out
}

/// Exhaustive search over `space` for the three-input gate, in order: input
/// length, then the phase tuple, then the offset tuple.
///
/// The all-zero row depends on phases only and is evaluated once per phase
/// tuple; every candidate still gets its own log record.
pub fn calibrate(
    kind: GateKind,
    catalog: &PrimitiveCatalog,
    rule: &RuleSpec,
    space: &SearchSpace,
) -> Result<CalibrationResult> {
    if kind != GateKind::W3 {
        return Err(Error::InvalidArgument(format!(
            "{kind} reuses the w3 particle parameters; use calibrate_delays"
        )));
    }
    let template = templates::w3();
    search(&template, catalog, rule, space, None)
}

/// Calibrate a composite gate from a three-input calibration, keeping its
/// particle offsets and searching only timing: launch phases for `w5`, whose
/// inputs beyond the third repeat the offsets cyclically, and sub-gate delays
/// in wave periods for the cascade, whose sub-gates reuse the whole
/// calibration. `choices` are the phases or delays to try.
pub fn calibrate_delays(
    kind: GateKind,
    w3: &CalibrationResult,
    catalog: &PrimitiveCatalog,
    rule: &RuleSpec,
    choices: &[u32],
) -> Result<CalibrationResult> {
    if w3.kind != GateKind::W3 {
        return Err(Error::InvalidArgument(
            "delay calibration needs a w3 calibration".into(),
        ));
    }
    match kind {
        GateKind::W5 => {
            let template = templates::w5().ok_or_else(|| Error::NoJunction(kind.to_string()))?;
            let n = template.input_rows.len();
            let offsets: Vec<i64> = (0..n)
                .map(|k| w3.params.offsets[k % w3.params.offsets.len()])
                .collect();
            let space = SearchSpace {
                offsets: vec![],
                phases: choices.to_vec(),
                input_lengths: vec![w3.params.input_length],
            };
            search(&template, catalog, rule, &space, Some(offsets))
        }
        GateKind::Cascade3 => {
            search_cascade(&templates::cascade(), &w3.params, catalog, rule, choices)
        }
        GateKind::W3 => Err(Error::InvalidArgument(
            "w3 has no delays; use calibrate".into(),
        )),
    }
}

fn search_cascade(
    template: &CascadeTemplate,
    w3: &GateParams,
    catalog: &PrimitiveCatalog,
    rule: &RuleSpec,
    delays: &[u32],
) -> Result<CalibrationResult> {
    let rows = input_rows(3 * template.gate.input_rows.len());
    let mut log = CalibrationLog::default();
    for tuple in tuples(delays, 3) {
        let params = GateParams {
            input_length: w3.input_length,
            offsets: w3.offsets.repeat(3),
            phases: w3.phases.repeat(3),
            delays: tuple,
        };
        let record = |rows_passed, steps_used, status| CandidateRecord {
            input_length: params.input_length,
            offsets: params.offsets.clone(),
            phases: params.phases.clone(),
            delays: params.delays.clone(),
            rows_passed,
            steps_used,
            status,
        };
        let layout = build_cascade(template, &params, catalog, rule)?;
        if !layout.is_still(rule)? {
            log.records.push(record(0, 0, CandidateStatus::NotStill));
            continue;
        }
        let (passed, steps, all) = score_rows_par(&layout, &rows, rule)?;
        let status = if all {
            CandidateStatus::Pass
        } else {
            CandidateStatus::Fail
        };
        log.records.push(record(passed, steps, status));
        if all {
            return Ok(CalibrationResult {
                kind: GateKind::Cascade3,
                params,
                tried: log.tried(),
                log,
            });
        }
    }
    Err(Error::CalibrationFailure {
        tried: log.tried(),
        log: Box::new(log),
    })
}

/// As `score_rows`, evaluating rows in parallel chunks.
fn score_rows_par(
    layout: &GateLayout,
    rows: &[Vec<u8>],
    rule: &RuleSpec,
) -> Result<(usize, u64, bool)> {
    const CHUNK: usize = 32;
    let mut passed = 0;
    let mut steps = 0;
    for chunk in rows.chunks(CHUNK) {
        let results: Vec<(usize, u64, bool)> = chunk
            .par_iter()
            .map(|r| score_rows(layout, std::slice::from_ref(r), rule))
            .collect::<Result<_>>()?;
        for (p, s, ok) in results {
            steps = steps.max(s);
            if !ok {
                return Ok((passed, steps, false));
            }
            passed += p;
        }
    }
    Ok((passed, steps, true))
}

fn search(
    template: &GateTemplate,
    catalog: &PrimitiveCatalog,
    rule: &RuleSpec,
    space: &SearchSpace,
    fixed_offsets: Option<Vec<i64>>,
) -> Result<CalibrationResult> {
    let n = template.input_rows.len();
    let rows = input_rows(n);
    let zero_row = &rows[..1];
    let offset_tuples = match &fixed_offsets {
        Some(o) => vec![o.clone()],
        None => tuples(&space.offsets, n),
    };
    let phase_tuples = tuples(&space.phases, n);
    let mut log = CalibrationLog::default();
    for &input_length in &space.input_lengths {
        let record =
            |offsets: &[i64], phases: &[u32], rows_passed, steps_used, status| CandidateRecord {
                input_length,
                offsets: offsets.to_vec(),
                phases: phases.to_vec(),
                delays: Vec::new(),
                rows_passed,
                steps_used,
                status,
            };
        if sites_for_length(input_length).is_none() {
            log.records
                .push(record(&[], &[], 0, 0, CandidateStatus::Unrealizable));
            continue;
        }
        let probe = GateParams {
            input_length,
            offsets: offset_tuples[0].clone(),
            phases: phase_tuples[0].clone(),
            delays: Vec::new(),
        };
        if !build_from_template(template, &probe, catalog, rule)?.is_still(rule)? {
            log.records
                .push(record(&[], &[], 0, 0, CandidateStatus::NotStill));
            continue;
        }
        for phases in &phase_tuples {
            let params = |offsets: &Vec<i64>| GateParams {
                input_length,
                offsets: offsets.clone(),
                phases: phases.clone(),
                delays: Vec::new(),
            };
            let base = build_from_template(template, &params(&offset_tuples[0]), catalog, rule)?;
            let (zero_passed, zero_steps, _) = score_rows(&base, zero_row, rule)?;
            if zero_passed == 0 {
                for offsets in &offset_tuples {
                    log.records.push(record(
                        offsets,
                        phases,
                        0,
                        zero_steps,
                        CandidateStatus::Fail,
                    ));
                }
                continue;
            }
            let scored: Vec<(usize, u64, bool)> = offset_tuples
                .par_iter()
                .map(|offsets| {
                    let layout = build_from_template(template, &params(offsets), catalog, rule)?;
                    let (passed, steps, all) = score_rows(&layout, &rows[1..], rule)?;
                    Ok((passed + 1, steps.max(zero_steps), all))
                })
                .collect::<Result<_>>()?;
            for (offsets, (passed, steps, all)) in offset_tuples.iter().zip(scored) {
                let status = if all {
                    CandidateStatus::Pass
                } else {
                    CandidateStatus::Fail
                };
                log.records
                    .push(record(offsets, phases, passed, steps, status));
                if all {
                    return Ok(CalibrationResult {
                        kind: template.kind,
                        params: params(offsets),
                        tried: log.tried(),
                        log,
                    });
                }
            }
        }
    }
    Err(Error::CalibrationFailure {
        tried: log.tried(),
        log: Box::new(log),
    })
}

/// The layout of `kind` for a calibration of that kind.
pub fn build_gate(
    kind: GateKind,
    calib: Option<&CalibrationResult>,
    catalog: &PrimitiveCatalog,
    rule: &RuleSpec,
) -> Result<GateLayout> {
    let calib = calib
        .filter(|c| c.kind == kind)
        .ok_or_else(|| Error::NotCalibrated(kind.to_string()))?;
    match kind {
        GateKind::W3 => build_from_template(&templates::w3(), &calib.params, catalog, rule),
        GateKind::W5 => {
            let template = templates::w5().ok_or_else(|| Error::NoJunction(kind.to_string()))?;
            build_from_template(&template, &calib.params, catalog, rule)
        }
        GateKind::Cascade3 => build_cascade(&templates::cascade(), &calib.params, catalog, rule),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn realizable_lengths() {
        let got: Vec<usize> = SearchSpace::default()
            .input_lengths
            .into_iter()
            .filter(|&l| sites_for_length(l).is_some())
            .collect();
        assert_eq!(got, vec![66, 74]);
        assert_eq!(sites_for_length(74), Some(9));
    }

    #[test]
    fn tuples_are_lexicographic() {
        let t = tuples(&[1, 2], 2);
        assert_eq!(t, vec![vec![1, 1], vec![1, 2], vec![2, 1], vec![2, 2]]);
        assert_eq!(tuples(&[0u32; 16], 3).len(), 4096);
    }

    #[test]
    fn uncalibrated_build_is_refused() {
        let rule = RuleSpec::b2s2345();
        let cat = crate::gatelab::discover_primitives(&rule).unwrap();
        assert!(matches!(
            build_gate(GateKind::W3, None, &cat, &rule),
            Err(Error::NotCalibrated(_))
        ));
    }

    fn w3_params() -> GateParams {
        GateParams {
            input_length: 66,
            offsets: vec![2, -1, 1],
            phases: vec![0; 3],
            delays: Vec::new(),
        }
    }

    #[test]
    fn unknown_junctions_are_reported() {
        let rule = RuleSpec::b2s2345();
        let cat = crate::gatelab::discover_primitives(&rule).unwrap();
        let w3 = CalibrationResult {
            kind: GateKind::W3,
            params: w3_params(),
            tried: 1,
            log: CalibrationLog::default(),
        };
        for kind in [GateKind::W5, GateKind::Cascade3] {
            assert!(matches!(
                calibrate_delays(kind, &w3, &cat, &rule, &[0]),
                Err(Error::NoJunction(_))
            ));
        }
    }

    #[test]
    fn cascade_delays_lengthen_outputs() {
        let rule = RuleSpec::b2s2345();
        let cat = crate::gatelab::discover_primitives(&rule).unwrap();
        // An all-open patch stands in for the final junction.
        let template = CascadeTemplate {
            junction: vec![".......".to_string(); 29],
            ..templates::cascade()
        };
        let w3 = w3_params();
        let params = GateParams {
            offsets: w3.offsets.repeat(3),
            phases: w3.phases.repeat(3),
            delays: vec![1, 0, 1],
            ..w3
        };
        let layout = build_cascade(&template, &params, &cat, &rule).unwrap();
        assert_eq!(layout.injection_sites.len(), 9);
        assert_eq!(layout.delay_count(), 2);
        let flat = GateParams {
            delays: vec![0; 3],
            ..params
        };
        let layout = build_cascade(&template, &flat, &cat, &rule).unwrap();
        assert_eq!(layout.delay_count(), 0);
        assert!(matches!(
            build_cascade(&templates::cascade(), &flat, &cat, &rule),
            Err(Error::NoJunction(_))
        ));
    }
}
