//! Period, displacement and speed of small patterns evolved in isolation.

use serde::{Deserialize, Serialize};

use crate::engine::{Grid, RuleSpec};
use crate::error::{Error, Result};
use crate::pattern::Pattern;

/// Largest bounding-box side a measured pattern may reach before it is
/// declared explosive.
pub const DEFAULT_SIZE_BUDGET: usize = 256;

/// Free cells kept between the live region and the arena edge.
const MARGIN: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternMetrics {
    pub mass: usize,
    /// Tight bounding box, width × height.
    pub volume: (usize, usize),
    pub period: u64,
    /// Translation per period, in cells.
    pub displacement: (i64, i64),
    /// Chebyshev norm of the displacement over the period, in cells/step.
    pub speed: f64,
}

impl PatternMetrics {
    /// Chebyshev magnitude of the displacement.
    pub fn displacement_norm(&self) -> u64 {
        self.displacement
            .0
            .unsigned_abs()
            .max(self.displacement.1.unsigned_abs())
    }

    /// Volume as (short side, long side), so that 3×4 and 4×3 agree.
    pub fn volume_sorted(&self) -> (usize, usize) {
        let (a, b) = self.volume;
        (a.min(b), a.max(b))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Measurement {
    Periodic(PatternMetrics),
    /// No translate of the initial live set reappeared within the limit.
    Aperiodic {
        max_steps: u64,
    },
}

impl Measurement {
    pub fn periodic(&self) -> Option<&PatternMetrics> {
        match self {
            Measurement::Periodic(m) => Some(m),
            Measurement::Aperiodic { .. } => None,
        }
    }
}

pub fn measure(pattern: &Pattern, rule: &RuleSpec, max_steps: u64) -> Result<Measurement> {
    measure_with_budget(pattern, rule, max_steps, DEFAULT_SIZE_BUDGET)
}

/// Evolve `pattern` alone and report the least `t <= max_steps` at which its
/// live set is a translate of the initial one.
///
/// The arena follows the pattern: whenever the live region nears the edge the
/// cells are copied into a fresh, re-centred arena, so a moving pattern never
/// touches the boundary. A live region wider or taller than `budget` cells
/// yields [`Error::BudgetExceeded`].
pub fn measure_with_budget(
    pattern: &Pattern,
    rule: &RuleSpec,
    max_steps: u64,
    budget: usize,
) -> Result<Measurement> {
    if max_steps == 0 {
        return Err(Error::InvalidArgument(
            "max_steps must be at least 1".into(),
        ));
    }
    let start = pattern.normalized();
    if start.is_empty() {
        return Err(Error::InvalidArgument(
            "cannot measure an empty pattern".into(),
        ));
    }
    let mut arena = Arena::new(&start)?;
    let origin = arena.live_origin().expect("non-empty");
    for t in 1..=max_steps {
        arena.grid.tick(rule);
        let Some(b) = arena.grid.live_bounds() else {
            return Ok(Measurement::Aperiodic { max_steps });
        };
        if b.width > budget || b.height > budget {
            return Err(Error::BudgetExceeded { budget, steps: t });
        }
        let now = arena.grid.extract(b);
        if now.cells() == start.cells() && (b.width, b.height) == (start.width(), start.height()) {
            let pos = arena.live_origin().expect("non-empty");
            let displacement = (pos.0 - origin.0, pos.1 - origin.1);
            let norm = displacement
                .0
                .unsigned_abs()
                .max(displacement.1.unsigned_abs());
            return Ok(Measurement::Periodic(PatternMetrics {
                mass: start.mass(),
                volume: (start.width(), start.height()),
                period: t,
                displacement,
                speed: norm as f64 / t as f64,
            }));
        }
        arena.recentre_if_needed(&now, b)?;
    }
    Ok(Measurement::Aperiodic { max_steps })
}

struct Arena {
    grid: Grid,
    /// Absolute coordinate of the arena's (0, 0).
    offset: (i64, i64),
}

impl Arena {
    fn new(p: &Pattern) -> Result<Self> {
        let grid = Grid::new(p.width() + 2 * (MARGIN + 8), p.height() + 2 * (MARGIN + 8))?
            .place(p, ((MARGIN + 8) as i64, (MARGIN + 8) as i64))?;
        Ok(Self {
            grid,
            offset: (0, 0),
        })
    }

    fn live_origin(&self) -> Option<(i64, i64)> {
        self.grid
            .live_bounds()
            .map(|b| (self.offset.0 + b.x as i64, self.offset.1 + b.y as i64))
    }

    fn recentre_if_needed(&mut self, live: &Pattern, b: crate::engine::Rect) -> Result<()> {
        let near = b.x < MARGIN
            || b.y < MARGIN
            || b.right() + MARGIN > self.grid.width()
            || b.bottom() + MARGIN > self.grid.height();
        if !near {
            return Ok(());
        }
        let pad = MARGIN + 8 + b.width.max(b.height);
        let generation = self.grid.generation();
        let grid = Grid::new(b.width + 2 * pad, b.height + 2 * pad)?
            .place(live, (pad as i64, pad as i64))?
            .with_generation(generation);
        self.offset = (
            self.offset.0 + b.x as i64 - pad as i64,
            self.offset.1 + b.y as i64 - pad as i64,
        );
        self.grid = grid;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::Transform;

    fn rule() -> RuleSpec {
        RuleSpec::b2s2345()
    }

    fn periodic(p: &Pattern) -> PatternMetrics {
        measure(p, &rule(), 64)
            .unwrap()
            .periodic()
            .cloned()
            .expect("periodic")
    }

    #[test]
    fn plus_is_still() {
        let m = periodic(&Pattern::from_rows(&["010", "111", "010"]).unwrap());
        assert_eq!(
            (m.mass, m.volume, m.period, m.displacement),
            (5, (3, 3), 1, (0, 0))
        );
        assert_eq!(m.speed, 0.0);
    }

    #[test]
    fn particle_moves_at_one_cell_per_step() {
        let m = periodic(&Pattern::from_rows(&["1001", "0000", "0110"]).unwrap());
        assert_eq!((m.mass, m.period, m.displacement_norm()), (4, 1, 1));
        assert_eq!(m.displacement, (0, 1));
        assert_eq!(m.speed, 1.0);
    }

    #[test]
    fn diagonal_pair_blinks() {
        let m = periodic(&Pattern::from_rows(&["10", "01"]).unwrap());
        assert_eq!(
            (m.mass, m.volume, m.period, m.displacement),
            (2, (2, 2), 2, (0, 0))
        );
    }

    #[test]
    fn translation_and_isometry_invariance() {
        let p = Pattern::from_rows(&["1001", "0000", "0110"]).unwrap();
        let shifted = Pattern::with_box(
            9,
            9,
            p.cells().iter().map(|&(x, y)| (x + 3, y + 5)).collect(),
        );
        assert_eq!(periodic(&shifted), periodic(&p));
        for t in Transform::ALL {
            let m = periodic(&p.transform(t));
            assert_eq!((m.period, m.mass), (1, 4));
            assert_eq!(m.speed, 1.0);
        }
    }

    #[test]
    fn dying_and_exploding_patterns() {
        let single = Pattern::from_rows(&["1"]).unwrap();
        assert_eq!(
            measure(&single, &rule(), 10).unwrap(),
            Measurement::Aperiodic { max_steps: 10 }
        );
        let block = Pattern::from_rows(&["11", "11"]).unwrap();
        assert!(matches!(
            measure_with_budget(&block, &rule(), 200, 40),
            Err(Error::BudgetExceeded { budget: 40, .. })
        ));
        assert!(measure(&block, &rule(), 0).is_err());
        assert!(measure(&Pattern::empty(), &rule(), 5).is_err());
    }
}
