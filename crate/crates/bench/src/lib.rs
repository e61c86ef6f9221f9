// SPDX-License-Identifier: Apache-2.0

//! Shared inputs for the benchmarks.

use prfloor_core::gen::{generate, GenParams};
use prfloor_core::{Design, Fabric};

/// Seeded design sized for `fabric`, with demands that fit its scale.
pub fn instance(fabric: &Fabric, regions: usize, seed: u64) -> Design {
    let large = fabric.row_height() > 1;
    generate(&GenParams {
        regions,
        seed,
        clb: if large { (10, 50) } else { (2, 12) },
        bram: if large { (0, 2) } else { (0, 1) },
        dsp: if large { (0, 2) } else { (0, 1) },
        scarce_fraction: if large { 0.3 } else { 1.0 },
        width: fabric.num_columns(),
        height: fabric.height(),
        ..GenParams::default()
    })
    .expect("bench parameters are valid")
}
