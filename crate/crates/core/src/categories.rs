//! Category palette and the category groupings used by mixing and scheduling.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imagecore::{Dims, UNCERTAIN_ID};

pub const ROAD: u8 = 0;
pub const SIDEWALK: u8 = 1;
pub const BUILDING: u8 = 2;
pub const WALL: u8 = 3;
pub const FENCE: u8 = 4;
pub const POLE: u8 = 5;
pub const TRAFFIC_LIGHT: u8 = 6;
pub const TRAFFIC_SIGN: u8 = 7;
pub const VEGETATION: u8 = 8;
pub const TERRAIN: u8 = 9;
pub const SKY: u8 = 10;
pub const PERSON: u8 = 11;
pub const RIDER: u8 = 12;
pub const CAR: u8 = 13;
pub const TRUCK: u8 = 14;
pub const BUS: u8 = 15;
pub const TRAM: u8 = 16;
pub const MOTORCYCLE: u8 = 17;
pub const BICYCLE: u8 = 18;
pub const STREETLIGHT: u8 = 19;

/// Name/id pairs of the default palette.
pub const DEFAULT_PALETTE: [(&str, u8); 20] = [
    ("road", ROAD),
    ("sidewalk", SIDEWALK),
    ("building", BUILDING),
    ("wall", WALL),
    ("fence", FENCE),
    ("pole", POLE),
    ("traffic_light", TRAFFIC_LIGHT),
    ("traffic_sign", TRAFFIC_SIGN),
    ("vegetation", VEGETATION),
    ("terrain", TERRAIN),
    ("sky", SKY),
    ("person", PERSON),
    ("rider", RIDER),
    ("car", CAR),
    ("truck", TRUCK),
    ("bus", BUS),
    ("tram", TRAM),
    ("motorcycle", MOTORCYCLE),
    ("bicycle", BICYCLE),
    ("streetlight", STREETLIGHT),
];

/// Minimum component area for a region to count as a pasteable object.
///
/// `Scaled` expresses the threshold at a reference frame size and rescales it
/// proportionally to the frame area at hand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum AreaThreshold {
    Fixed { pixels: usize },
    Scaled { pixels: usize, reference_height: usize, reference_width: usize },
}

impl Default for AreaThreshold {
    fn default() -> Self {
        AreaThreshold::Scaled { pixels: 64, reference_height: 256, reference_width: 256 }
    }
}

impl AreaThreshold {
    /// Threshold in pixels for a frame of the given size (at least 1).
    pub fn for_frame(&self, dims: Dims) -> usize {
        match *self {
            AreaThreshold::Fixed { pixels } => pixels.max(1),
            AreaThreshold::Scaled { pixels, reference_height, reference_width } => {
                let reference = (reference_height * reference_width) as f64;
                let scaled = pixels as f64 * dims.len() as f64 / reference;
                (scaled.round() as usize).max(1)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CategoryConfig {
    /// Small object categories eligible for pasting.
    pub soc_set: Vec<u8>,
    /// Categories that must touch the road to be pasted.
    pub vehicle_set: Vec<u8>,
    /// Foreground categories that pasted regions must not occlude.
    pub object_set: Vec<u8>,
    pub road_id: u8,
    pub vegetation_id: u8,
    pub traffic_light_id: u8,
    pub streetlight_id: u8,
    pub area_threshold: AreaThreshold,
}

impl Default for CategoryConfig {
    fn default() -> Self {
        CategoryConfig {
            soc_set: vec![TRAFFIC_LIGHT, TRAFFIC_SIGN, MOTORCYCLE],
            vehicle_set: vec![CAR, TRUCK, BUS, MOTORCYCLE, TRAM],
            object_set: vec![
                TRAFFIC_LIGHT,
                TRAFFIC_SIGN,
                PERSON,
                RIDER,
                CAR,
                TRUCK,
                BUS,
                TRAM,
                MOTORCYCLE,
                BICYCLE,
                STREETLIGHT,
            ],
            road_id: ROAD,
            vegetation_id: VEGETATION,
            traffic_light_id: TRAFFIC_LIGHT,
            streetlight_id: STREETLIGHT,
            area_threshold: AreaThreshold::default(),
        }
    }
}

impl CategoryConfig {
    pub fn validate(&self) -> Result<()> {
        if self.soc_set.is_empty() {
            return Err(Error::InvalidParameter("soc_set must not be empty".into()));
        }
        let ids = self.soc_set.iter().chain(&self.vehicle_set).chain(&self.object_set).chain([
            &self.road_id,
            &self.vegetation_id,
            &self.traffic_light_id,
            &self.streetlight_id,
        ]);
        if ids.clone().any(|&id| id == UNCERTAIN_ID) {
            return Err(Error::InvalidParameter(format!(
                "category id {UNCERTAIN_ID} is reserved for uncertain pixels"
            )));
        }
        let threshold_ok = match self.area_threshold {
            AreaThreshold::Fixed { pixels } => pixels >= 1,
            AreaThreshold::Scaled { pixels, reference_height, reference_width } => {
                pixels >= 1 && reference_height * reference_width > 0
            }
        };
        if !threshold_ok {
            return Err(Error::InvalidParameter("area_threshold must be at least 1 pixel".into()));
        }
        Ok(())
    }

    pub fn is_vehicle(&self, id: u8) -> bool {
        self.vehicle_set.contains(&id)
    }
}
