// SPDX-License-Identifier: Apache-2.0

//! Bundled device descriptions and a sample design.

use crate::design::{parse_design, Design};
use crate::fabric::{parse_device, Fabric};

pub const USER_10X23: &str = include_str!("../devices/user_10x23.dev");
pub const VIRTEX5_SCALE: &str = include_str!("../devices/virtex5_scale.dev");
pub const ARTIX7_SCALE: &str = include_str!("../devices/artix7_scale.dev");
pub const IMAGE_FILTER: &str = include_str!("../designs/image_filter.design");

/// 10 rows by 23 columns; columns 0-9 CLB, 10 BRAM, 11 DSP, 12 BRAM, 13-22 CLB.
pub fn user_10x23() -> Fabric {
    parse_device(USER_10X23).expect("bundled device parses")
}

pub fn virtex5_scale() -> Fabric {
    parse_device(VIRTEX5_SCALE).expect("bundled device parses")
}

pub fn artix7_scale() -> Fabric {
    parse_device(ARTIX7_SCALE).expect("bundled device parses")
}

/// Seven regions, each with a median and a mean filter module.
pub fn image_filter() -> Design {
    parse_design(IMAGE_FILTER).expect("bundled design parses")
}

/// Looks up a bundled device by name.
pub fn device_by_name(name: &str) -> Option<Fabric> {
    match name {
        "user_10x23" => Some(user_10x23()),
        "virtex5_scale" => Some(virtex5_scale()),
        "artix7_scale" => Some(artix7_scale()),
        _ => None,
    }
}
