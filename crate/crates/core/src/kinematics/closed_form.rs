//! Expanded trigonometric position equations for the Baxter left arm.
//!
//! The expressions use link lengths `l1..l4` along the chain and offsets
//! `d1..d4` perpendicular to it. Their binding to the DH rows is
//!
//! | symbol | value    | DH row.field |
//! |--------|----------|--------------|
//! | l1     | 0.27035  | S0-S1.d      |
//! | l2     | 0.36435  | E0-E1.d      |
//! | l3     | 0.37429  | W0-W1.d      |
//! | l4     | 0.229525 | W2-EE.d      |
//! | d1     | 0.069    | S0-S1.a      |
//! | d2     | 0.069    | E0-E1.a      |
//! | d3     | 0.01     | W0-W1.a      |
//! | d4     | 0        | (none)       |
//!
//! Joint angles enter raw: the `+π/2` offset of row S1-E0 is already folded
//! into the expressions.

use nalgebra::Vector3;

use crate::error::{check_len, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaxterClosedFormConstants {
    pub l1: f64,
    pub l2: f64,
    pub l3: f64,
    pub l4: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
    pub d4: f64,
}

impl Default for BaxterClosedFormConstants {
    fn default() -> Self {
        Self {
            l1: 0.27035,
            l2: 0.36435,
            l3: 0.37429,
            l4: 0.229525,
            d1: 0.069,
            d2: 0.069,
            d3: 0.01,
            d4: 0.0,
        }
    }
}

/// End-effector position of the Baxter left arm from the expanded closed form.
pub fn fpk_position_closed_form_baxter(q: &[f64]) -> Result<Vector3<f64>> {
    check_len(7, q.len())?;
    Ok(closed_form_position(
        q,
        &BaxterClosedFormConstants::default(),
    ))
}

pub(crate) fn closed_form_position(q: &[f64], k: &BaxterClosedFormConstants) -> Vector3<f64> {
    let (s0, c0) = q[0].sin_cos();
    let (s1, c1) = q[1].sin_cos();
    let (s2, c2) = q[2].sin_cos();
    let (s3, c3) = q[3].sin_cos();
    let (s4, c4) = q[4].sin_cos();
    let (s5, c5) = q[5].sin_cos();
    let (s6, c6) = q[6].sin_cos();
    let BaxterClosedFormConstants {
        l1,
        l2,
        l3,
        l4,
        d1,
        d2,
        d3,
        d4,
    } = *k;

    // Recurring sub-expressions of the X and Y equations.
    let xa = s0 * s2 * s3 - c0 * c1 * c3 + c0 * c2 * s1 * s3;
    let xb = c0 * c1 * s3 + c3 * s0 * s2 + c0 * c2 * c3 * s1;
    let xc = c2 * s0 - c0 * s1 * s2;
    let ya = c1 * c3 * s0 + c0 * s2 * s3 - c2 * s0 * s1 * s3;
    let yb = c1 * s0 * s3 - c0 * c3 * s2 + c2 * c3 * s0 * s1;
    let yc = c0 * c2 + s0 * s1 * s2;

    let x = d1 * c0 - l4 * (c5 * xa + s5 * (c4 * xb + s4 * xc)) - l3 * xa - d3 * s4 * xc
        + l2 * c0 * c1
        - d2 * s0 * s2
        - d3 * c4 * xb
        + d4 * c6 * (s5 * xa - c5 * (c4 * xb + s4 * xc))
        + d4 * s6 * (s4 * xb - c4 * xc)
        - d2 * c0 * c2 * s1;

    let y = l4 * (c5 * ya - s5 * (c4 * yb - s4 * yc))
        + d1 * s0
        + l3 * ya
        + d4 * s6 * (s4 * yb + c4 * yc)
        + d3 * s4 * yc
        + d2 * c0 * s2
        + l2 * c1 * s0
        - d3 * c4 * yb
        - d4 * c6 * (s5 * ya + c5 * (c4 * yb - s4 * yc))
        - d2 * c2 * s0 * s1;

    let z = l1 - l2 * s1 - d2 * c1 * c2 - l3 * c3 * s1 - l3 * c1 * c2 * s3 - l4 * c3 * c5 * s1
        + d3 * c1 * s2 * s4
        + d3 * c4 * s1 * s3
        - d3 * c1 * c2 * c3 * c4
        - l4 * c1 * c2 * c5 * s3
        + d4 * c1 * c4 * s2 * s6
        + d4 * c3 * c6 * s1 * s5
        + l4 * c1 * s2 * s4 * s5
        + l4 * c4 * s1 * s3 * s5
        - d4 * s1 * s3 * s4 * s6
        - l4 * c1 * c2 * c3 * c4 * s5
        + d4 * c1 * c2 * c3 * s4 * s6
        + d4 * c1 * c2 * c6 * s3 * s5
        + d4 * c1 * c5 * c6 * s2 * s4
        + d4 * c4 * c5 * c6 * s1 * s3
        - d4 * c1 * c2 * c3 * c4 * c5 * c6;

    Vector3::new(x, y, z)
}
