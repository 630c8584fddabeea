//! Offline UAV placement from a vehicle density forecast.
//!
//! A UAV that must guarantee rate `λ_max` anywhere in its coverage pays
//! downlink power proportional to the squared slant distance. The expected
//! guarantee power over a density is therefore a weighted sum of squared
//! distances, minimized at the density centroid of the coverage area. The
//! realized trajectory chases that centroid under the per-slot speed limit.

use std::borrow::Borrow;

use serde::{Deserialize, Serialize};

use crate::config::UavConfig;
use crate::mobility::clamp_uav_move;
use crate::model::{Position, RectRegion};
use crate::radio::ChannelParams;

/// Piecewise-constant density over a rectangular region, normalized to 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityGrid {
    pub region: RectRegion,
    pub nx: usize,
    pub ny: usize,
    /// Row-major cell masses, index `iy * nx + ix`.
    pub weights: Vec<f64>,
}

impl DensityGrid {
    /// Normalizes `raw` masses; an all-zero input becomes uniform.
    pub fn from_masses(region: RectRegion, nx: usize, ny: usize, raw: Vec<f64>) -> Self {
        assert_eq!(raw.len(), nx * ny, "mass vector does not match grid");
        let total: f64 = raw.iter().sum();
        let weights = if total > 0.0 {
            raw.into_iter().map(|w| w / total).collect()
        } else {
            vec![1.0 / (nx * ny) as f64; nx * ny]
        };
        Self {
            region,
            nx,
            ny,
            weights,
        }
    }

    /// Midpoint-rule discretization of an unnormalized density.
    pub fn from_fn(region: RectRegion, nx: usize, ny: usize, density: impl Fn(&Position) -> f64) -> Self {
        let shape = Self {
            region,
            nx,
            ny,
            weights: Vec::new(),
        };
        let raw = (0..nx * ny)
            .map(|k| density(&shape.cell_center(k % nx, k / nx)).max(0.0))
            .collect();
        Self::from_masses(region, nx, ny, raw)
    }

    /// Histogram of `points` with `pseudo_count` added to every cell.
    pub fn from_points<'a>(
        region: RectRegion,
        nx: usize,
        ny: usize,
        points: impl IntoIterator<Item = &'a Position>,
        pseudo_count: f64,
    ) -> Self {
        let mut raw = vec![pseudo_count; nx * ny];
        for p in points {
            if !region.contains(p) {
                continue;
            }
            let ix = (((p.x - region.x_min) / region.width() * nx as f64) as usize).min(nx - 1);
            let iy = (((p.y - region.y_min) / region.height() * ny as f64) as usize).min(ny - 1);
            raw[iy * nx + ix] += 1.0;
        }
        Self::from_masses(region, nx, ny, raw)
    }

    pub fn uniform(region: RectRegion, nx: usize, ny: usize) -> Self {
        Self::from_masses(region, nx, ny, vec![1.0; nx * ny])
    }

    pub fn cell_rect(&self, ix: usize, iy: usize) -> RectRegion {
        let w = self.region.width() / self.nx as f64;
        let h = self.region.height() / self.ny as f64;
        RectRegion::new(
            self.region.x_min + w * ix as f64,
            self.region.x_min + w * (ix + 1) as f64,
            self.region.y_min + h * iy as f64,
            self.region.y_min + h * (iy + 1) as f64,
        )
    }

    pub fn cell_center(&self, ix: usize, iy: usize) -> Position {
        self.cell_rect(ix, iy).center()
    }

    pub fn cell_width(&self) -> f64 {
        self.region.width() / self.nx as f64
    }

    pub fn cell_height(&self) -> f64 {
        self.region.height() / self.ny as f64
    }

    /// Mass of each cell falling inside `coverage`, paired with the midpoint
    /// of the covered part of the cell.
    pub fn masses_within(&self, coverage: &RectRegion) -> Vec<(Position, f64)> {
        let mut out = Vec::new();
        for iy in 0..self.ny {
            for ix in 0..self.nx {
                let w = self.weights[iy * self.nx + ix];
                if w <= 0.0 {
                    continue;
                }
                let cell = self.cell_rect(ix, iy);
                let overlap = cell.overlap_area(coverage);
                if overlap <= 0.0 {
                    continue;
                }
                let clipped = RectRegion::new(
                    cell.x_min.max(coverage.x_min),
                    cell.x_max.min(coverage.x_max),
                    cell.y_min.max(coverage.y_min),
                    cell.y_max.min(coverage.y_max),
                );
                out.push((clipped.center(), w * overlap / cell.area()));
            }
        }
        out
    }
}

/// Mass-weighted centroid of the density inside `coverage`, or the
/// coverage center when the coverage holds no mass.
pub fn centroid_target(grid: &DensityGrid, coverage: &RectRegion) -> Position {
    let (mut sx, mut sy, mut sm) = (0.0, 0.0, 0.0);
    for (p, m) in grid.masses_within(coverage) {
        sx += m * p.x;
        sy += m * p.y;
        sm += m;
    }
    if sm > 0.0 {
        Position::new(sx / sm, sy / sm)
    } else {
        coverage.center()
    }
}

/// Downlink power a UAV at `uav_pos` needs to guarantee `lambda_max` to a
/// ground point `ground`.
pub fn guarantee_power(uav: &UavConfig, uav_pos: &Position, ground: &Position, ch: &ChannelParams, lambda_max: f64) -> f64 {
    let d2 = uav_pos.distance_sq(ground) + uav.altitude_m * uav.altitude_m;
    let factor = (lambda_max / ch.effective_bandwidth() * std::f64::consts::LN_2).exp_m1();
    factor * ch.noise_power_w * d2 / ch.channel_gain_ref
}

/// `c_i · ∬_{C_i} P_i f`, the expected guarantee power of one UAV.
pub fn coverage_power(grid: &DensityGrid, uav: &UavConfig, uav_pos: &Position, ch: &ChannelParams, lambda_max: f64) -> f64 {
    let c = f64::from(uav.channels);
    grid.masses_within(&uav.coverage)
        .into_iter()
        .map(|(p, m)| c * m * guarantee_power(uav, uav_pos, &p, ch, lambda_max))
        .sum()
}

/// Channel-weighted average guarantee power over all UAVs.
pub fn avg_transmit_power(
    grid: &DensityGrid,
    uav_positions: &[Position],
    uavs: &[UavConfig],
    ch: &ChannelParams,
    lambda_max: f64,
) -> f64 {
    let total_c: f64 = uavs.iter().map(|u| f64::from(u.channels)).sum();
    let z: f64 = uavs
        .iter()
        .zip(uav_positions)
        .map(|(u, p)| coverage_power(grid, u, p, ch, lambda_max))
        .sum();
    z / total_c
}

/// Per-slot, per-UAV positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeploymentPlan {
    pub positions: Vec<Vec<Position>>,
}

impl DeploymentPlan {
    /// Every UAV parked at the center of its coverage for `num_slots` slots.
    pub fn fixed_centers(uavs: &[UavConfig], num_slots: usize) -> Self {
        let row: Vec<Position> = uavs.iter().map(|u| u.coverage.center()).collect();
        Self {
            positions: vec![row; num_slots],
        }
    }

    pub fn num_slots(&self) -> usize {
        self.positions.len()
    }

    /// Position at `slot`, holding the last planned position beyond the horizon.
    pub fn position(&self, slot: u64, uav: usize) -> Position {
        let k = (slot as usize).min(self.positions.len().saturating_sub(1));
        self.positions[k][uav]
    }
}

/// Centroid chase under the speed limit, starting from each UAV's start.
pub fn plan_trajectory<G: Borrow<DensityGrid>>(
    grids: impl IntoIterator<Item = G>,
    uavs: &[UavConfig],
    slot_length_s: f64,
) -> DeploymentPlan {
    let mut current: Vec<Position> = uavs.iter().map(|u| u.start_position()).collect();
    let mut positions = Vec::new();
    for grid in grids {
        for (u, pos) in uavs.iter().zip(current.iter_mut()) {
            let target = centroid_target(grid.borrow(), &u.coverage);
            *pos = clamp_uav_move(*pos, target, u.max_speed_mps, slot_length_s);
        }
        positions.push(current.clone());
    }
    DeploymentPlan { positions }
}
