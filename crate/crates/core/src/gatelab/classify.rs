//! Reading a bit off a channel: symmetric wave = 0, asymmetric wave = 1.

use serde::{Deserialize, Serialize};

use crate::engine::{ActivityTrace, Grid, Rect, RuleSpec};
use crate::error::{Error, Result};
use crate::gatelab::channel::Axis;

/// Steps the window is watched for; the asymmetric wave repeats every 16.
pub const PROBE_STEPS: usize = 16;

/// Fewer live cells than this in the window throughout the probe means no
/// signal arrived.
pub const SIGNAL_THRESHOLD: u64 = 4;

/// A transversal band of a channel interior, mirrored about the channel axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputWindow {
    pub rect: Rect,
    /// Direction of travel through the window; the mirror line runs along it
    /// through the middle of the band.
    pub axis: Axis,
}

impl OutputWindow {
    /// Twice the coordinate of the mirror line, across the axis.
    pub fn mirror_line2(&self) -> usize {
        match self.axis {
            Axis::Horizontal => 2 * self.rect.y + self.rect.height - 1,
            Axis::Vertical => 2 * self.rect.x + self.rect.width - 1,
        }
    }

    fn across(&self) -> usize {
        match self.axis {
            Axis::Horizontal => self.rect.height,
            Axis::Vertical => self.rect.width,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BitSignal {
    pub value: u8,
    /// Generation at which the probe started.
    pub probe_start: u64,
    /// Probe step of the first mirror mismatch, if any.
    pub first_asymmetry: Option<usize>,
    pub mirror_line2: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Classification {
    Bit(BitSignal),
    NoSignal,
}

impl Classification {
    pub fn bit(&self) -> Option<u8> {
        match self {
            Classification::Bit(b) => Some(b.value),
            Classification::NoSignal => None,
        }
    }
}

fn check_window(grid: &Grid, window: &OutputWindow) -> Result<()> {
    if !window.rect.fits_in(grid.width(), grid.height()) {
        return Err(Error::InvalidArgument(format!(
            "window {:?} outside {}x{} grid",
            window.rect,
            grid.width(),
            grid.height()
        )));
    }
    if window.across() < 2 || window.rect.area() == 0 {
        return Err(Error::InvalidArgument(format!(
            "window {:?} has no extent across a {:?} channel",
            window.rect, window.axis
        )));
    }
    Ok(())
}

/// Watch `window` for [`PROBE_STEPS`] steps starting from a copy of `grid`.
pub fn classify_output(
    grid: &Grid,
    window: &OutputWindow,
    rule: &RuleSpec,
) -> Result<Classification> {
    check_window(grid, window)?;
    let start = grid.generation();
    let mut g = grid.clone();
    let trace = g.record_window(rule, window.rect, PROBE_STEPS)?;
    Ok(classify_trace(&trace, window.axis, start))
}

/// Classify an already recorded window trace.
pub fn classify_trace(trace: &ActivityTrace, axis: Axis, probe_start: u64) -> Classification {
    let r = trace.window();
    let steps = trace.steps();
    let (w, h) = (r.width, r.height);
    let at = |x: usize, y: usize, t: usize| trace.series(y * w + x)[t];
    let mut peak = 0u64;
    let mut first_asymmetry = None;
    for t in 0..steps {
        let mut pop = 0u64;
        let mut symmetric = true;
        for y in 0..h {
            for x in 0..w {
                let v = at(x, y, t);
                pop += u64::from(v);
                let (mx, my) = match axis {
                    Axis::Horizontal => (x, h - 1 - y),
                    Axis::Vertical => (w - 1 - x, y),
                };
                if v != at(mx, my, t) {
                    symmetric = false;
                }
            }
        }
        peak = peak.max(pop);
        if !symmetric && first_asymmetry.is_none() {
            first_asymmetry = Some(t);
        }
    }
    if peak < SIGNAL_THRESHOLD {
        return Classification::NoSignal;
    }
    let window = OutputWindow { rect: r, axis };
    Classification::Bit(BitSignal {
        value: u8::from(first_asymmetry.is_some()),
        probe_start,
        first_asymmetry,
        mirror_line2: window.mirror_line2(),
    })
}
