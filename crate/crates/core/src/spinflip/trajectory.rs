use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// A classical spin value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Spin {
    Up,
    Down,
}

impl Spin {
    pub fn value(self) -> f64 {
        match self {
            Spin::Up => 1.0,
            Spin::Down => -1.0,
        }
    }

    pub fn flipped(self) -> Spin {
        match self {
            Spin::Up => Spin::Down,
            Spin::Down => Spin::Up,
        }
    }

    pub fn from_bool(up: bool) -> Spin {
        if up {
            Spin::Up
        } else {
            Spin::Down
        }
    }

    /// Spin after `n` flips.
    pub fn after(self, n: usize) -> Spin {
        if n % 2 == 0 {
            self
        } else {
            self.flipped()
        }
    }
}

impl From<Spin> for i8 {
    fn from(s: Spin) -> i8 {
        match s {
            Spin::Up => 1,
            Spin::Down => -1,
        }
    }
}

impl TryFrom<i8> for Spin {
    type Error = String;

    fn try_from(v: i8) -> std::result::Result<Spin, String> {
        match v {
            1 => Ok(Spin::Up),
            -1 => Ok(Spin::Down),
            other => Err(format!("spin must be +1 or -1, got {other}")),
        }
    }
}

impl fmt::Display for Spin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}", i8::from(*self))
    }
}

/// A piecewise-constant right-continuous `±1` path on `[t_lo, t_hi]`.
///
/// The value at `t` is `initial · (-1)^{#flips ≤ t}`. Flip times are strictly
/// increasing and lie in `(t_lo, t_hi]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TrajectoryJson", into = "TrajectoryJson")]
pub struct Trajectory {
    t_lo: f64,
    t_hi: f64,
    initial: Spin,
    flips: Vec<f64>,
}

impl Trajectory {
    pub fn new(t_lo: f64, t_hi: f64, initial: Spin, flips: Vec<f64>) -> Result<Self> {
        if !(t_lo.is_finite() && t_hi.is_finite() && t_lo < t_hi) {
            return Err(invalid(format!("degenerate interval [{t_lo}, {t_hi}]")));
        }
        if flips.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("flip times must be strictly increasing"));
        }
        if let (Some(&first), Some(&last)) = (flips.first(), flips.last()) {
            if first <= t_lo || last > t_hi {
                return Err(invalid(format!(
                    "flip times must lie in ({t_lo}, {t_hi}], got [{first}, {last}]"
                )));
            }
        }
        Ok(Trajectory { t_lo, t_hi, initial, flips })
    }

    pub fn constant(t_lo: f64, t_hi: f64, value: Spin) -> Result<Self> {
        Self::new(t_lo, t_hi, value, Vec::new())
    }

    /// Caller guarantees the invariants.
    pub(crate) fn from_parts_unchecked(t_lo: f64, t_hi: f64, initial: Spin, flips: Vec<f64>) -> Self {
        debug_assert!(flips.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(flips.first().is_none_or(|&f| f > t_lo));
        debug_assert!(flips.last().is_none_or(|&f| f <= t_hi));
        Trajectory { t_lo, t_hi, initial, flips }
    }

    pub fn t_lo(&self) -> f64 {
        self.t_lo
    }

    pub fn t_hi(&self) -> f64 {
        self.t_hi
    }

    pub fn length(&self) -> f64 {
        self.t_hi - self.t_lo
    }

    pub fn initial(&self) -> Spin {
        self.initial
    }

    pub fn flips(&self) -> &[f64] {
        &self.flips
    }

    pub fn n_flips(&self) -> usize {
        self.flips.len()
    }

    /// Number of flips at times `≤ t`.
    pub fn flips_up_to(&self, t: f64) -> usize {
        self.flips.partition_point(|&f| f <= t)
    }

    /// `σ(t)`; times outside the interval are clamped to it.
    pub fn value_at(&self, t: f64) -> Spin {
        self.initial.after(self.flips_up_to(t))
    }

    pub fn final_value(&self) -> Spin {
        self.initial.after(self.flips.len())
    }

    pub fn negated(&self) -> Trajectory {
        Trajectory { initial: self.initial.flipped(), ..self.clone() }
    }

    pub fn contains_interval(&self, lo: f64, hi: f64) -> bool {
        self.t_lo <= lo && hi <= self.t_hi && lo <= hi
    }

    /// Replace the path on `(a, b]` by `initial_a` at `a` followed by
    /// `new_flips` (which must lie in `(a, b]`). The value at `b` and later is
    /// kept unless `new_flips` changes the parity, in which case the caller
    /// guarantees consistency. If `a == t_lo` the initial value is replaced.
    pub(crate) fn splice(&mut self, a: f64, b: f64, value_at_a: Spin, new_flips: &[f64]) {
        let start = self.flips.partition_point(|&f| f <= a);
        let end = self.flips.partition_point(|&f| f <= b);
        if a <= self.t_lo {
            self.initial = value_at_a;
        } else {
            // a is interior: value at a must not change.
            debug_assert_eq!(self.initial.after(start), value_at_a);
        }
        self.flips.splice(start..end, new_flips.iter().copied());
        debug_assert!(self.flips.windows(2).all(|w| w[0] < w[1]));
    }
}

/// `∫_lo^hi σ_x(t) σ_y(t) dt`, computed exactly by merging flip lists.
pub fn overlap_integral(x: &Trajectory, y: &Trajectory, lo: f64, hi: f64) -> Result<f64> {
    if !x.contains_interval(lo, hi) || !y.contains_interval(lo, hi) {
        return Err(Error::IntervalMismatch(format!(
            "[{lo}, {hi}] not inside [{}, {}] and [{}, {}]",
            x.t_lo, x.t_hi, y.t_lo, y.t_hi
        )));
    }
    Ok(overlap_unchecked(x, y, lo, hi))
}

pub(crate) fn overlap_unchecked(x: &Trajectory, y: &Trajectory, lo: f64, hi: f64) -> f64 {
    let mut i = x.flips_up_to(lo);
    let mut j = y.flips_up_to(lo);
    let mut sign = x.initial.after(i).value() * y.initial.after(j).value();
    let fx = &x.flips;
    let fy = &y.flips;
    let mut t = lo;
    let mut acc = 0.0;
    loop {
        let nx = fx.get(i).copied().filter(|&f| f <= hi);
        let ny = fy.get(j).copied().filter(|&f| f <= hi);
        let next = match (nx, ny) {
            (None, None) => break,
            (Some(a), None) => {
                i += 1;
                a
            }
            (None, Some(b)) => {
                j += 1;
                b
            }
            (Some(a), Some(b)) => {
                if a < b {
                    i += 1;
                    a
                } else if b < a {
                    j += 1;
                    b
                } else {
                    // simultaneous flips leave the product unchanged
                    i += 1;
                    j += 1;
                    acc += sign * (a - t);
                    t = a;
                    continue;
                }
            }
        };
        acc += sign * (next - t);
        t = next;
        sign = -sign;
    }
    acc + sign * (hi - t)
}

#[derive(Serialize, Deserialize)]
struct TrajectoryJson {
    t_lo: f64,
    t_hi: f64,
    initial: Spin,
    flips: Vec<String>,
}

impl From<Trajectory> for TrajectoryJson {
    fn from(t: Trajectory) -> Self {
        TrajectoryJson {
            t_lo: t.t_lo,
            t_hi: t.t_hi,
            initial: t.initial,
            // `Display` for f64 prints the shortest string that round-trips.
            flips: t.flips.iter().map(|f| f.to_string()).collect(),
        }
    }
}

impl TryFrom<TrajectoryJson> for Trajectory {
    type Error = String;

    fn try_from(j: TrajectoryJson) -> std::result::Result<Self, String> {
        let flips = j
            .flips
            .iter()
            .map(|s| s.parse::<f64>().map_err(|e| format!("bad flip time {s:?}: {e}")))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        Trajectory::new(j.t_lo, j.t_hi, j.initial, flips).map_err(|e| e.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn traj(lo: f64, hi: f64, s: Spin, flips: &[f64]) -> Trajectory {
        Trajectory::new(lo, hi, s, flips.to_vec()).unwrap()
    }

    #[test]
    fn value_is_right_continuous() {
        let t = traj(0.0, 2.0, Spin::Up, &[0.5, 1.5]);
        assert_eq!(t.value_at(0.0), Spin::Up);
        assert_eq!(t.value_at(0.4999), Spin::Up);
        assert_eq!(t.value_at(0.5), Spin::Down);
        assert_eq!(t.value_at(1.5), Spin::Up);
        assert_eq!(t.final_value(), Spin::Up);
    }

    #[test]
    fn rejects_bad_flips() {
        assert!(Trajectory::new(0.0, 1.0, Spin::Up, vec![0.0]).is_err());
        assert!(Trajectory::new(0.0, 1.0, Spin::Up, vec![0.5, 0.5]).is_err());
        assert!(Trajectory::new(0.0, 1.0, Spin::Up, vec![1.5]).is_err());
        assert!(Trajectory::new(1.0, 1.0, Spin::Up, vec![]).is_err());
        assert!(Trajectory::new(0.0, 1.0, Spin::Up, vec![1.0]).is_ok());
    }

    #[test]
    fn overlap_examples() {
        let d = 0.7;
        let up = traj(0.0, d, Spin::Up, &[]);
        let down = traj(0.0, d, Spin::Down, &[]);
        let half = traj(0.0, d, Spin::Up, &[d / 2.0]);
        assert_eq!(overlap_integral(&up, &up, 0.0, d).unwrap(), d);
        assert_eq!(overlap_integral(&up, &down, 0.0, d).unwrap(), -d);
        assert!(overlap_integral(&half, &up, 0.0, d).unwrap().abs() < 1e-15);
    }

    #[test]
    fn overlap_on_subinterval_and_mismatch() {
        let a = traj(0.0, 4.0, Spin::Up, &[1.0, 3.0]);
        let b = traj(0.0, 4.0, Spin::Up, &[2.0]);
        // products: [0,1) +, [1,2) -, [2,3) +, [3,4] -
        assert!((overlap_integral(&a, &b, 0.0, 4.0).unwrap()).abs() < 1e-15);
        assert!((overlap_integral(&a, &b, 0.5, 2.5).unwrap()).abs() < 1e-15);
        assert!((overlap_integral(&a, &b, 0.5, 1.5).unwrap()).abs() < 1e-15);
        assert!((overlap_integral(&a, &b, 2.0, 4.0).unwrap()).abs() < 1e-15);
        assert!((overlap_integral(&a, &b, 0.25, 1.0).unwrap() - 0.75).abs() < 1e-15);
        let c = traj(1.0, 5.0, Spin::Up, &[]);
        assert!(matches!(overlap_integral(&a, &c, 0.0, 4.0), Err(Error::IntervalMismatch(_))));
        assert!(overlap_integral(&a, &c, 1.0, 4.0).is_ok());
    }

    #[test]
    fn simultaneous_flips_cancel() {
        let a = traj(0.0, 2.0, Spin::Up, &[1.0]);
        let b = traj(0.0, 2.0, Spin::Down, &[1.0]);
        assert_eq!(overlap_integral(&a, &b, 0.0, 2.0).unwrap(), -2.0);
    }

    #[test]
    fn json_uses_decimal_strings() {
        let t = traj(-1.0, 1.0, Spin::Down, &[0.1, 0.30000000000000004]);
        let s = serde_json::to_string(&t).unwrap();
        assert_eq!(
            s,
            r#"{"t_lo":-1.0,"t_hi":1.0,"initial":-1,"flips":["0.1","0.30000000000000004"]}"#
        );
        let back: Trajectory = serde_json::from_str(&s).unwrap();
        assert_eq!(back, t);
        assert!(serde_json::from_str::<Trajectory>(
            r#"{"t_lo":0.0,"t_hi":1.0,"initial":0,"flips":[]}"#
        )
        .is_err());
    }
}
