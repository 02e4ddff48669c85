//! Exhaustive search for the rule's small primitives and the 6×6 block built
//! from four still lifes.

use serde::{Deserialize, Serialize};

use crate::engine::{Grid, RuleSpec};
use crate::error::{Error, Result};
use crate::metrics::{measure_with_budget, Measurement, PatternMetrics};
use crate::pattern::{Pattern, Transform};

/// Steps allowed when measuring a candidate; every target class has period ≤ 2.
const MEASURE_STEPS: u64 = 16;
const MEASURE_BUDGET: usize = 64;

/// Steps a robustness collision is followed for.
const COLLISION_STEPS: u64 = 96;

/// Free cells between the particle and the block face when fired.
const FIRING_GAP: usize = 6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrimitiveCatalog {
    pub still_life: Pattern,
    pub blinker: Pattern,
    pub oscillator: Pattern,
    pub particle: Pattern,
    pub indestructible: Pattern,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Heading {
    North,
    East,
    South,
    West,
}

impl Heading {
    pub const ALL: [Heading; 4] = [Heading::North, Heading::East, Heading::South, Heading::West];

    /// Unit step in screen coordinates (y grows downward).
    pub fn delta(self) -> (i64, i64) {
        match self {
            Heading::North => (0, -1),
            Heading::East => (1, 0),
            Heading::South => (0, 1),
            Heading::West => (-1, 0),
        }
    }
}

/// One class the search looks for: a box, a mass and the motion it must show.
#[derive(Clone, Copy, Debug)]
struct ClassSpec {
    name: &'static str,
    width: usize,
    height: usize,
    mass: usize,
    period: u64,
    displacement: u64,
}

const CLASSES: [ClassSpec; 4] = [
    ClassSpec {
        name: "still life",
        width: 3,
        height: 3,
        mass: 5,
        period: 1,
        displacement: 0,
    },
    ClassSpec {
        name: "blinker",
        width: 2,
        height: 2,
        mass: 2,
        period: 2,
        displacement: 0,
    },
    ClassSpec {
        name: "oscillator",
        width: 3,
        height: 3,
        mass: 3,
        period: 2,
        displacement: 0,
    },
    ClassSpec {
        name: "particle",
        width: 3,
        height: 4,
        mass: 4,
        period: 1,
        displacement: 1,
    },
];

/// Every `k`-subset of `0..n`, in lexicographic order.
fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// All `mass`-cell placements in a `width`×`height` box.
pub fn candidates(width: usize, height: usize, mass: usize) -> Vec<Pattern> {
    combinations(width * height, mass)
        .into_iter()
        .map(|idx| {
            Pattern::with_box(
                width,
                height,
                idx.iter().map(|&i| (i % width, i / width)).collect(),
            )
        })
        .collect()
}

fn matches(p: &Pattern, class: &ClassSpec, rule: &RuleSpec) -> bool {
    if !p.is_tight() {
        return false;
    }
    match measure_with_budget(p, rule, MEASURE_STEPS, MEASURE_BUDGET) {
        Ok(Measurement::Periodic(m)) => {
            m.period == class.period && m.displacement_norm() == class.displacement
        }
        _ => false,
    }
}

/// Canonical representatives of every class found in the exhaustive search
/// for one primitive, sorted by canonical key.
pub fn discover_class(
    name: &str,
    width: usize,
    height: usize,
    mass: usize,
    rule: &RuleSpec,
) -> Result<Vec<Pattern>> {
    let class = CLASSES
        .iter()
        .find(|c| c.name == name)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown primitive class {name:?}")))?;
    let class = ClassSpec {
        width,
        height,
        mass,
        ..*class
    };
    let mut reps: Vec<Pattern> = candidates(width, height, mass)
        .into_iter()
        .filter(|p| matches(p, &class, rule))
        .map(|p| p.canonical())
        .collect();
    reps.sort_by_key(|p| p.to_rows());
    reps.dedup();
    Ok(reps)
}

pub fn discover_primitives(rule: &RuleSpec) -> Result<PrimitiveCatalog> {
    let mut found = Vec::with_capacity(CLASSES.len());
    let mut missing = Vec::new();
    for c in &CLASSES {
        match discover_class(c.name, c.width, c.height, c.mass, rule)?
            .into_iter()
            .next()
        {
            Some(first) => found.push(first.named(c.name)),
            None => missing.push(c.name),
        }
    }
    if !missing.is_empty() {
        return Err(Error::DiscoveryFailure(missing.join(", ")));
    }
    let particle = found.pop().unwrap();
    let oscillator = found.pop().unwrap();
    let blinker = found.pop().unwrap();
    let still_life = found.pop().unwrap();
    let indestructible = search_indestructible(&still_life, rule)?.named("indestructible");
    Ok(PrimitiveCatalog {
        still_life,
        blinker,
        oscillator,
        particle,
        indestructible,
    })
}

/// Four copies of `still_life`, each under some isometry, placed in a 6×6
/// box without overlap so the union is a still life invariant under a
/// quarter turn. Returns the canonical such union.
pub fn search_indestructible(still_life: &Pattern, rule: &RuleSpec) -> Result<Pattern> {
    const SIDE: usize = 6;
    let mut images: Vec<Pattern> = Transform::ALL
        .iter()
        .map(|&t| still_life.transform(t))
        .collect();
    images.sort_by_key(|p| p.to_rows());
    images.dedup();
    let mut pieces: Vec<Vec<(usize, usize)>> = Vec::new();
    for img in &images {
        if img.width() > SIDE || img.height() > SIDE {
            continue;
        }
        for oy in 0..=SIDE - img.height() {
            for ox in 0..=SIDE - img.width() {
                pieces.push(img.cells().iter().map(|&(x, y)| (x + ox, y + oy)).collect());
            }
        }
    }
    let target = 4 * still_life.mass();
    let mut best: Option<Pattern> = None;
    for combo in combinations(pieces.len(), 4) {
        let mut cells: Vec<(usize, usize)> = combo
            .iter()
            .flat_map(|&i| pieces[i].iter().copied())
            .collect();
        cells.sort_unstable();
        cells.dedup();
        if cells.len() != target {
            continue;
        }
        let p = Pattern::with_box(SIDE, SIDE, cells);
        if !p.is_tight() || p.transform(Transform::Rot90) != p || !is_still(&p, rule) {
            continue;
        }
        let c = p.canonical();
        if best.as_ref().is_none_or(|b| c.to_rows() < b.to_rows()) {
            best = Some(c);
        }
    }
    best.ok_or_else(|| Error::DiscoveryFailure("indestructible block".into()))
}

pub fn is_still(p: &Pattern, rule: &RuleSpec) -> bool {
    let pad = 2;
    let g = Grid::new(p.width() + 2 * pad, p.height() + 2 * pad)
        .and_then(|g| g.place(p, (pad as i64, pad as i64)))
        .expect("padded grid fits the pattern");
    g.step(rule).same_cells(&g)
}

impl PrimitiveCatalog {
    /// The particle turned so that it travels along `heading`.
    pub fn particle_heading(&self, heading: Heading, rule: &RuleSpec) -> Result<Pattern> {
        oriented(&self.particle, heading, rule)
    }

    pub fn metrics(&self, rule: &RuleSpec) -> Result<Vec<(String, PatternMetrics)>> {
        [
            ("still life", &self.still_life),
            ("blinker", &self.blinker),
            ("oscillator", &self.oscillator),
            ("particle", &self.particle),
            ("indestructible", &self.indestructible),
        ]
        .into_iter()
        .map(
            |(name, p)| match measure_with_budget(p, rule, MEASURE_STEPS, MEASURE_BUDGET)? {
                Measurement::Periodic(m) => Ok((name.to_string(), m)),
                Measurement::Aperiodic { .. } => Err(Error::DiscoveryFailure(name.to_string())),
            },
        )
        .collect()
    }
}

/// The image of a period-1 mover whose displacement is `heading`.
pub fn oriented(particle: &Pattern, heading: Heading, rule: &RuleSpec) -> Result<Pattern> {
    for t in Transform::ALL {
        let img = particle.transform(t);
        if let Measurement::Periodic(m) = measure_with_budget(&img, rule, 2, MEASURE_BUDGET)? {
            if m.displacement == heading.delta() {
                return Ok(img);
            }
        }
    }
    Err(Error::DiscoveryFailure(format!(
        "particle heading {heading:?}"
    )))
}

/// Outcome of firing the particle at the block once.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollisionCase {
    pub heading: Heading,
    /// Shift of the particle's leading face across the block, in cells,
    /// relative to the block's near corner.
    pub offset: i64,
    pub survived: bool,
}

/// Fire the particle at `block` along each heading at every lateral offset
/// where the two overlap, and report whether all block cells are still alive
/// once the collision has played out.
pub fn robustness(
    block: &Pattern,
    particle: &Pattern,
    rule: &RuleSpec,
) -> Result<Vec<CollisionCase>> {
    let mut cases = Vec::new();
    for heading in Heading::ALL {
        let p = oriented(particle, heading, rule)?;
        // Extent across the direction of travel.
        let (across_p, across_b) = match heading {
            Heading::North | Heading::South => (p.width() as i64, block.width() as i64),
            Heading::East | Heading::West => (p.height() as i64, block.height() as i64),
        };
        let margin = COLLISION_STEPS as usize + 8;
        let (bw, bh) = (block.width(), block.height());
        let size_w = bw + 2 * margin;
        let size_h = bh + 2 * margin;
        let (bx, by) = (margin as i64, margin as i64);
        for offset in (1 - across_p)..across_b {
            let gap = FIRING_GAP as i64;
            let origin = match heading {
                Heading::South => (bx + offset, by - gap - p.height() as i64),
                Heading::North => (bx + offset, by + bh as i64 + gap),
                Heading::East => (bx - gap - p.width() as i64, by + offset),
                Heading::West => (bx + bw as i64 + gap, by + offset),
            };
            let mut g = Grid::new(size_w, size_h)?.place(block, (bx, by))?;
            g.place_mut(&p, origin)?;
            g.advance(rule, COLLISION_STEPS);
            let survived = block
                .cells()
                .iter()
                .all(|&(x, y)| g.get(bx + x as i64, by + y as i64));
            cases.push(CollisionCase {
                heading,
                offset,
                survived,
            });
        }
    }
    Ok(cases)
}
