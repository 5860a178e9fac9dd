//! Uniform scalar quantiser with an exponential step scale.

use crate::{Error, Result};

pub const MAX_QP: u8 = 51;
const MAX_LEVEL: f64 = (1 << 30) as f64;

/// `2^((qp − 4)/6)`: the step doubles every six qp.
pub fn step_size(qp: u8) -> f64 {
    ((qp as f64 - 4.0) / 6.0).exp2()
}

fn check(qp: u8) -> Result<()> {
    if qp > MAX_QP {
        return Err(Error::InvalidArgument(format!("qp {qp} outside [0, {MAX_QP}]")));
    }
    Ok(())
}

pub fn quantize(coeffs: &[f64], qp: u8) -> Result<Vec<i32>> {
    check(qp)?;
    let step = step_size(qp);
    // f64::round rounds half away from zero
    Ok(coeffs.iter().map(|&c| (c / step).round().clamp(-MAX_LEVEL, MAX_LEVEL) as i32).collect())
}

pub fn dequantize(levels: &[i32], qp: u8) -> Result<Vec<f64>> {
    check(qp)?;
    let step = step_size(qp);
    Ok(levels.iter().map(|&q| q as f64 * step).collect())
}
