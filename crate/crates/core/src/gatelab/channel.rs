//! Straight channels walled with indestructible blocks.

use serde::{Deserialize, Serialize};

use crate::engine::RuleSpec;
use crate::error::{Error, Result};
use crate::gatelab::discovery::{is_still, PrimitiveCatalog};
use crate::pattern::{Pattern, Transform};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Horizontal,
    Vertical,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub axis: Axis,
    /// Interior length along the axis, in cells.
    pub length: usize,
    pub interior_width: usize,
    /// Dead cells between neighbouring blocks of a wall.
    pub wall_spacing: usize,
}

impl Default for ChannelSpec {
    fn default() -> Self {
        Self {
            axis: Axis::Horizontal,
            length: 72,
            interior_width: 10,
            wall_spacing: 2,
        }
    }
}

/// Narrowest interior that fits the 4-cell particle with a free cell on each
/// side.
pub const MIN_INTERIOR_WIDTH: usize = 6;

/// Gaps of one cell between blocks ignite births.
pub const MIN_WALL_SPACING: usize = 2;

impl ChannelSpec {
    pub fn horizontal(length: usize) -> Self {
        Self {
            length,
            ..Self::default()
        }
    }

    pub fn vertical(length: usize) -> Self {
        Self {
            axis: Axis::Vertical,
            length,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.interior_width < MIN_INTERIOR_WIDTH {
            return Err(Error::InvalidGeometry(format!(
                "interior width {} is below the minimum {MIN_INTERIOR_WIDTH}",
                self.interior_width
            )));
        }
        if self.wall_spacing < MIN_WALL_SPACING {
            return Err(Error::InvalidGeometry(format!(
                "wall spacing {} is below the minimum {MIN_WALL_SPACING}",
                self.wall_spacing
            )));
        }
        if self.length == 0 {
            return Err(Error::InvalidGeometry(
                "channel length must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Blocks per wall: enough to cover `length`.
    pub fn blocks_per_wall(&self, block_side: usize) -> usize {
        let pitch = block_side + self.wall_spacing;
        (self.length + self.wall_spacing).div_ceil(pitch)
    }
}

/// Two parallel walls of blocks with a clear interior; both ends open.
///
/// A horizontal channel's box is `blocks·pitch − spacing` wide and
/// `2·block + interior_width` tall; a vertical one is its transpose.
pub fn build_channel(
    spec: &ChannelSpec,
    catalog: &PrimitiveCatalog,
    rule: &RuleSpec,
) -> Result<Pattern> {
    spec.validate()?;
    let block = &catalog.indestructible;
    let side = block.width();
    let pitch = side + spec.wall_spacing;
    let n = spec.blocks_per_wall(side);
    let width = n * pitch - spec.wall_spacing;
    let height = 2 * side + spec.interior_width;
    let mut cells = Vec::with_capacity(2 * n * block.mass());
    for k in 0..n {
        for wall_y in [0, side + spec.interior_width] {
            cells.extend(
                block
                    .cells()
                    .iter()
                    .map(|&(x, y)| (x + k * pitch, y + wall_y)),
            );
        }
    }
    let horizontal = Pattern::with_box(width, height, cells);
    let channel = match spec.axis {
        Axis::Horizontal => horizontal,
        Axis::Vertical => horizontal.transform(Transform::Transpose),
    };
    if !is_still(&channel, rule) {
        return Err(Error::InvalidGeometry(format!(
            "empty channel {spec:?} is not a still life"
        )));
    }
    Ok(channel.named("channel"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gatelab::discovery::discover_primitives;

    #[test]
    fn geometry_checks() {
        let rule = RuleSpec::b2s2345();
        let cat = discover_primitives(&rule).unwrap();
        let narrow = ChannelSpec {
            interior_width: 4,
            ..ChannelSpec::default()
        };
        assert!(matches!(
            build_channel(&narrow, &cat, &rule),
            Err(Error::InvalidGeometry(_))
        ));
        let tight = ChannelSpec {
            wall_spacing: 1,
            ..ChannelSpec::default()
        };
        assert!(matches!(
            build_channel(&tight, &cat, &rule),
            Err(Error::InvalidGeometry(_))
        ));
    }

    #[test]
    fn default_channel_shape() {
        let rule = RuleSpec::b2s2345();
        let cat = discover_primitives(&rule).unwrap();
        let ch = build_channel(&ChannelSpec::default(), &cat, &rule).unwrap();
        // 10 blocks at pitch 8 cover 72 cells.
        assert_eq!((ch.width(), ch.height(), ch.mass()), (78, 22, 400));
        let v = build_channel(&ChannelSpec::vertical(72), &cat, &rule).unwrap();
        assert_eq!((v.width(), v.height()), (22, 78));
    }
}
