use serde::{Deserialize, Serialize};

use super::trajectory::{Spin, Trajectory};
use crate::error::{invalid, Error, Result};

/// One length-`δ` segment of a spin line, in local time `[0, δ]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockSpin {
    /// Global time of local time 0.
    pub origin: f64,
    pub spin: Trajectory,
}

/// Relative tolerance for `length / δ` being an integer.
const RATIO_TOL: f64 = 1e-9;

/// Cut `traj` into consecutive blocks of length `delta`.
///
/// Block `k` covers global times `(t_lo + kδ, t_lo + (k+1)δ]`. A flip exactly
/// on a block boundary is the last event of the earlier block, so the later
/// block starts from the post-flip value and
/// `σ^{(k)}(δ) = σ^{(k+1)}(0)` always holds.
pub fn block_decompose(traj: &Trajectory, delta: f64) -> Result<Vec<BlockSpin>> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(invalid(format!("block length must be positive, got {delta}")));
    }
    let ratio = traj.length() / delta;
    let n = ratio.round();
    if n < 1.0 || (ratio - n).abs() > RATIO_TOL * ratio.max(1.0) {
        return Err(Error::NonIntegralRatio { ratio });
    }
    let n = n as usize;
    let mut blocks = Vec::with_capacity(n);
    let flips = traj.flips();
    let mut idx = 0;
    let mut value = traj.initial();
    for k in 0..n {
        let origin = traj.t_lo() + k as f64 * delta;
        let end = if k + 1 == n { traj.t_hi() } else { traj.t_lo() + (k + 1) as f64 * delta };
        let start_value = value;
        let mut local = Vec::new();
        while idx < flips.len() && flips[idx] <= end {
            let mut t = flips[idx] - origin;
            // rounding can push a flip just inside the interval onto 0 or past δ
            if t <= 0.0 {
                t = f64::MIN_POSITIVE;
            }
            local.push(t.min(delta));
            value = value.flipped();
            idx += 1;
        }
        let local = strictly_increasing(local);
        let spin = Trajectory::new(0.0, delta, start_value, local)?;
        blocks.push(BlockSpin { origin, spin });
    }
    Ok(blocks)
}

fn strictly_increasing(mut v: Vec<f64>) -> Vec<f64> {
    // collisions after the shift are astronomically rare; keep parity by
    // removing pairs
    let mut j = 0;
    while j + 1 < v.len() {
        if v[j] >= v[j + 1] {
            v.drain(j..j + 2);
        } else {
            j += 1;
        }
    }
    v
}

/// Glue blocks back into one trajectory on `[origin_0, origin_last + δ]`.
///
/// Fails if consecutive blocks violate `σ^{(k)}(δ) = σ^{(k+1)}(0)` or do not
/// tile the interval.
pub fn recompose(blocks: &[BlockSpin]) -> Result<Trajectory> {
    let first = blocks.first().ok_or(Error::EmptyInterval)?;
    let delta = first.spin.t_hi();
    let mut flips = Vec::new();
    let mut prev_end: Option<Spin> = None;
    for (k, b) in blocks.iter().enumerate() {
        if b.spin.t_lo() != 0.0 || (b.spin.t_hi() - delta).abs() > RATIO_TOL * delta {
            return Err(invalid(format!("block {k} is not on [0, {delta}]")));
        }
        if let Some(v) = prev_end {
            if v != b.spin.initial() {
                return Err(Error::BoundaryViolation(format!(
                    "block {} ends at {v} but block {k} starts at {}",
                    k - 1,
                    b.spin.initial()
                )));
            }
        }
        flips.extend(b.spin.flips().iter().map(|&t| b.origin + t));
        prev_end = Some(b.spin.final_value());
    }
    let last = blocks.last().expect("nonempty");
    Trajectory::new(first.origin, last.origin + delta, first.spin.initial(), strictly_increasing(flips))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flipless_line_gives_constant_blocks() {
        let t = Trajectory::constant(0.0, 2.0, Spin::Down).unwrap();
        let b = block_decompose(&t, 1.0).unwrap();
        assert_eq!(b.len(), 2);
        assert!(b.iter().all(|x| x.spin.n_flips() == 0 && x.spin.initial() == Spin::Down));
    }

    #[test]
    fn flip_shifts_to_local_time() {
        let d = 0.5;
        let t = Trajectory::new(0.0, 2.0 * d, Spin::Up, vec![1.5 * d]).unwrap();
        let b = block_decompose(&t, d).unwrap();
        assert_eq!(b[0].spin.n_flips(), 0);
        assert_eq!(b[1].spin.flips(), &[0.5 * d]);
        assert_eq!(b[1].spin.initial(), Spin::Up);
    }

    #[test]
    fn boundary_flip_belongs_to_earlier_block() {
        let t = Trajectory::new(0.0, 3.0, Spin::Up, vec![1.0]).unwrap();
        let b = block_decompose(&t, 1.0).unwrap();
        assert_eq!(b[0].spin.flips(), &[1.0]);
        assert_eq!(b[0].spin.final_value(), Spin::Down);
        assert_eq!(b[1].spin.initial(), Spin::Down);
        assert_eq!(recompose(&b).unwrap(), t);
    }

    #[test]
    fn non_integral_ratio() {
        let t = Trajectory::constant(0.0, 1.5, Spin::Up).unwrap();
        assert!(matches!(block_decompose(&t, 1.0), Err(Error::NonIntegralRatio { .. })));
    }

    #[test]
    fn recompose_rejects_mismatch() {
        let a = BlockSpin { origin: 0.0, spin: Trajectory::constant(0.0, 1.0, Spin::Up).unwrap() };
        let b = BlockSpin { origin: 1.0, spin: Trajectory::constant(0.0, 1.0, Spin::Down).unwrap() };
        assert!(matches!(recompose(&[a, b]), Err(Error::BoundaryViolation(_))));
    }
}
