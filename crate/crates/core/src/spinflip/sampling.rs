use rand::Rng;
use rand_distr::{Distribution, Exp};

use super::trajectory::{Spin, Trajectory};
use crate::error::{invalid, Result};

/// Bridges on intervals with `h·length` at or below this are sampled directly
/// from the parity-conditioned Poisson law instead of being bisected further.
pub const BRIDGE_LEAF_RATE: f64 = 1.0;

/// `P(σ(t+dt) = η′ | σ(t) = η) = (1 + η η′ e^{−2h dt}) / 2`.
pub fn transition_kernel(eta: Spin, eta_prime: Spin, dt: f64, h: f64) -> Result<f64> {
    check_rate(h)?;
    if !(dt >= 0.0) || !dt.is_finite() {
        return Err(invalid(format!("dt must be finite and nonnegative, got {dt}")));
    }
    Ok(kernel_same(eta == eta_prime, dt, h))
}

/// Unchecked kernel: `(1 ± e^{−2h dt})/2`.
#[inline]
pub fn kernel_same(same: bool, dt: f64, h: f64) -> f64 {
    let e = (-2.0 * h * dt).exp();
    if same {
        0.5 * (1.0 + e)
    } else {
        // written this way to keep full relative precision for small dt
        -0.5 * (-2.0 * h * dt).exp_m1()
    }
}

fn check_rate(h: f64) -> Result<()> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(invalid(format!("flip rate h must be positive, got {h}")));
    }
    Ok(())
}

fn check_interval(lo: f64, hi: f64) -> Result<()> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(invalid(format!("degenerate interval [{lo}, {hi}]")));
    }
    Ok(())
}

/// Stationary process on `[lo, hi]`: uniform start, rate-`h` Poisson flips.
pub fn sample_stationary<R: Rng + ?Sized>(h: f64, lo: f64, hi: f64, rng: &mut R) -> Result<Trajectory> {
    let start = Spin::from_bool(rng.random::<bool>());
    sample_forward(start, h, lo, hi, rng)
}

/// The process started from `start` at `lo`.
pub fn sample_forward<R: Rng + ?Sized>(
    start: Spin,
    h: f64,
    lo: f64,
    hi: f64,
    rng: &mut R,
) -> Result<Trajectory> {
    check_rate(h)?;
    check_interval(lo, hi)?;
    let mut flips = Vec::new();
    poisson_times(h, lo, hi, rng, &mut flips);
    Ok(Trajectory::from_parts_unchecked(lo, hi, start, flips))
}

pub(crate) fn poisson_times<R: Rng + ?Sized>(h: f64, lo: f64, hi: f64, rng: &mut R, out: &mut Vec<f64>) {
    let exp = Exp::new(h).expect("rate checked by caller");
    let mut t = lo;
    loop {
        t += exp.sample(rng);
        if t > hi {
            break;
        }
        // guard against a zero-length gap produced by rounding
        if out.last().is_some_and(|&l| t <= l) || t <= lo {
            continue;
        }
        out.push(t);
    }
}

/// The stationary process on `[lo, hi]` conditioned on `σ(lo) = eta_lo` and
/// `σ(hi) = eta_hi`.
pub fn sample_bridge<R: Rng + ?Sized>(
    eta_lo: Spin,
    eta_hi: Spin,
    lo: f64,
    hi: f64,
    h: f64,
    rng: &mut R,
) -> Result<Trajectory> {
    check_rate(h)?;
    check_interval(lo, hi)?;
    let mut flips = Vec::new();
    bridge_into(eta_lo, eta_hi, lo, hi, h, rng, &mut flips);
    Ok(Trajectory::from_parts_unchecked(lo, hi, eta_lo, flips))
}

pub(crate) fn bridge_into<R: Rng + ?Sized>(
    va: Spin,
    vb: Spin,
    a: f64,
    b: f64,
    h: f64,
    rng: &mut R,
    out: &mut Vec<f64>,
) {
    let len = b - a;
    let mid = a + 0.5 * len;
    if h * len <= BRIDGE_LEAF_RATE || !(a < mid && mid < b) {
        let odd = va != vb;
        let n = conditioned_poisson_count(h * len, odd, rng);
        let base = out.len();
        for _ in 0..n {
            // (0, 1] so that times land in (a, b]
            let u = 1.0 - rng.random::<f64>();
            out.push((a + u * len).min(b));
        }
        let slice = &mut out[base..];
        slice.sort_by(f64::total_cmp);
        // ties and values rounding onto `a` have probability ~0; drop them in
        // pairs so parity is preserved
        dedup_pairs(out, base, a);
        return;
    }
    let half = 0.5 * len;
    // P(mid = s) ∝ k(va, s) k(s, vb)
    let w_up = kernel_same(va == Spin::Up, half, h) * kernel_same(vb == Spin::Up, half, h);
    let w_down = kernel_same(va == Spin::Down, half, h) * kernel_same(vb == Spin::Down, half, h);
    let vm = Spin::from_bool(rng.random::<f64>() * (w_up + w_down) < w_up);
    bridge_into(va, vm, a, mid, h, rng, out);
    bridge_into(vm, vb, mid, b, h, rng, out);
}

fn dedup_pairs(out: &mut Vec<f64>, base: usize, a: f64) {
    let mut i = base;
    let mut dropped_at_a = 0usize;
    while i < out.len() && out[i] <= a {
        i += 1;
        dropped_at_a += 1;
    }
    if dropped_at_a > 0 {
        let keep = dropped_at_a % 2;
        // an odd leftover flip at `a` is nudged to the next float
        out.drain(base..base + dropped_at_a - keep);
        if keep == 1 {
            out[base] = next_up(a);
        }
    }
    let mut j = base;
    while j + 1 < out.len() {
        if out[j] >= out[j + 1] {
            out.drain(j..j + 2);
        } else {
            j += 1;
        }
    }
}

fn next_up(x: f64) -> f64 {
    if x == 0.0 {
        f64::from_bits(1)
    } else if x > 0.0 {
        f64::from_bits(x.to_bits() + 1)
    } else {
        f64::from_bits(x.to_bits() - 1)
    }
}

/// Draw `N ~ Poisson(lambda)` conditioned on `N` being odd (`odd = true`) or
/// even, by sequential inversion.
pub fn conditioned_poisson_count<R: Rng + ?Sized>(lambda: f64, odd: bool, rng: &mut R) -> usize {
    debug_assert!(lambda >= 0.0);
    if lambda == 0.0 {
        return usize::from(odd);
    }
    // P(N = n | parity) = (λ^n / n!) / Z with Z = cosh λ or sinh λ.
    let z = if odd { lambda.sinh() } else { lambda.cosh() };
    let mut n = usize::from(odd);
    let mut term = if odd { lambda } else { 1.0 };
    let u = rng.random::<f64>() * z;
    let mut cum = term;
    while u > cum {
        n += 2;
        term *= lambda * lambda / ((n - 1) as f64 * n as f64);
        if term == 0.0 {
            break;
        }
        cum += term;
    }
    n
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn kernel_reference_values() {
        assert_eq!(transition_kernel(Spin::Up, Spin::Up, 0.0, 3.0).unwrap(), 1.0);
        assert_eq!(transition_kernel(Spin::Up, Spin::Down, 0.0, 3.0).unwrap(), 0.0);
        let k = transition_kernel(Spin::Up, Spin::Up, 0.5, 1.0).unwrap();
        assert!((k - 0.683_939_720_585_721_2).abs() < 1e-15);
        assert!(transition_kernel(Spin::Up, Spin::Up, -0.1, 1.0).is_err());
        assert!(transition_kernel(Spin::Up, Spin::Up, 0.1, 0.0).is_err());
    }

    #[test]
    fn chapman_kolmogorov() {
        for &h in &[0.1, 1.0, 4.0, 30.0] {
            for &d1 in &[0.0, 0.01, 0.3, 1.7] {
                for &d2 in &[0.0, 0.05, 0.9] {
                    for a in [Spin::Up, Spin::Down] {
                        for c in [Spin::Up, Spin::Down] {
                            let composed: f64 = [Spin::Up, Spin::Down]
                                .iter()
                                .map(|&b| {
                                    transition_kernel(a, b, d1, h).unwrap()
                                        * transition_kernel(b, c, d2, h).unwrap()
                                })
                                .sum();
                            let direct = transition_kernel(a, c, d1 + d2, h).unwrap();
                            assert!((composed - direct).abs() < 1e-12);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn conditioned_count_has_right_parity_and_mean() {
        let mut rng = stream(7, 0);
        let lambda = 0.8;
        let n = 200_000;
        let mut sum_even = 0.0;
        for _ in 0..n {
            let k = conditioned_poisson_count(lambda, false, &mut rng);
            assert_eq!(k % 2, 0);
            sum_even += k as f64;
        }
        // E[N | even] = λ tanh λ
        let want = lambda * lambda.tanh();
        assert!((sum_even / n as f64 - want).abs() < 0.01, "{}", sum_even / n as f64);
        for _ in 0..1000 {
            assert_eq!(conditioned_poisson_count(lambda, true, &mut rng) % 2, 1);
        }
    }

    #[test]
    fn bridge_respects_endpoints() {
        let mut rng = stream(11, 3);
        for &(a, b) in &[(Spin::Up, Spin::Down), (Spin::Down, Spin::Down), (Spin::Up, Spin::Up)] {
            for &h in &[0.3, 5.0, 200.0] {
                for _ in 0..200 {
                    let t = sample_bridge(a, b, -1.0, 2.0, h, &mut rng).unwrap();
                    assert_eq!(t.initial(), a);
                    assert_eq!(t.final_value(), b);
                    assert!(t.flips().windows(2).all(|w| w[0] < w[1]));
                    assert!(t.flips().iter().all(|&f| f > -1.0 && f <= 2.0));
                }
            }
        }
    }

    #[test]
    fn deterministic_given_seed() {
        let a = sample_stationary(2.0, 0.0, 5.0, &mut stream(1, 1)).unwrap();
        let b = sample_stationary(2.0, 0.0, 5.0, &mut stream(1, 1)).unwrap();
        assert_eq!(a, b);
    }
}
