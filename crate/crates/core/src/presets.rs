//! Bundled example configurations.

use std::f64::consts::FRAC_PI_6;

use crate::framework::FrameworkSpec;

/// Unit-length planar framework whose three edge vectors all point into the
/// lower half-plane (at -30, -150 and -90 degrees), giving concave hexagonal
/// cells. Illustrative reentrant geometry, pointed at the origin vertex.
pub fn reentrant_honeycomb() -> FrameworkSpec {
    let (c, s) = (FRAC_PI_6.cos(), FRAC_PI_6.sin());
    FrameworkSpec::from_vectors(&[vec![c, -s], vec![-c, -s], vec![0.0, -1.0]])
        .expect("preset is well formed")
}
