//! Euclidean projections used by the ADMM updates.

/// Project `y` onto `{x : Σx = total, 0 ≤ x_i ≤ cap}` (`cap` may be
/// infinite). Requires `0 ≤ total ≤ n · cap`.
///
/// The solution is `clamp(y − τ, 0, cap)` with `τ` found between the sorted
/// breakpoints `y_i` and `y_i − cap`, where the clamped sum is linear in `τ`.
pub fn project_capped_simplex(y: &[f64], total: f64, cap: f64) -> Vec<f64> {
    let n = y.len();
    if n == 0 {
        return Vec::new();
    }
    if total <= 0.0 {
        return vec![0.0; n];
    }
    if cap.is_finite() && total >= n as f64 * cap {
        return vec![cap; n];
    }
    let sum_at = |tau: f64| -> f64 { y.iter().map(|&v| (v - tau).clamp(0.0, cap)).sum() };
    let mut bps: Vec<f64> = y.to_vec();
    if cap.is_finite() {
        bps.extend(y.iter().map(|&v| v - cap));
    }
    bps.sort_by(f64::total_cmp);
    bps.dedup();
    // sum_at is non-increasing in tau; it is n·cap (or unbounded) below the
    // first breakpoint and 0 above the last.
    let mut lo = bps[0];
    if !cap.is_finite() {
        // Below the smallest y the sum grows without bound: extend left.
        let s0 = sum_at(lo);
        if s0 < total {
            let tau = lo - (total - s0) / n as f64;
            return y.iter().map(|&v| (v - tau).max(0.0)).collect();
        }
    }
    let mut s_lo = sum_at(lo);
    let mut tau = lo;
    for &hi in &bps[1..] {
        let s_hi = sum_at(hi);
        if s_hi <= total {
            tau = if s_lo > s_hi {
                lo + (s_lo - total) * (hi - lo) / (s_lo - s_hi)
            } else {
                lo
            };
            break;
        }
        lo = hi;
        s_lo = s_hi;
        tau = hi;
    }
    y.iter().map(|&v| (v - tau).clamp(0.0, cap)).collect()
}

/// Project `y` onto `{x ≥ 0 : Σx ≤ budget}`.
pub fn project_budget(y: &[f64], budget: f64) -> Vec<f64> {
    let clipped: Vec<f64> = y.iter().map(|&v| v.max(0.0)).collect();
    if clipped.iter().sum::<f64>() <= budget {
        return clipped;
    }
    project_capped_simplex(y, budget.max(0.0), f64::INFINITY)
}

/// Project blocks `y_k` (each of length `block`) onto
/// `{u ≥ 0 : Σ u_k ≤ b_k for every k, Σ_k Σ u_k ≤ aggregate}`.
///
/// The shared constraint is handled by bisection on its multiplier `θ`,
/// each block being `project_budget(y_k − θ, b_k)`.
pub fn project_budget_aggregate(y: &[f64], block: usize, budgets: &[f64], aggregate: f64) -> Vec<f64> {
    let at = |theta: f64| -> Vec<f64> {
        let mut out = Vec::with_capacity(y.len());
        for (k, chunk) in y.chunks(block).enumerate() {
            let shifted: Vec<f64> = chunk.iter().map(|&v| v - theta).collect();
            out.extend(project_budget(&shifted, budgets[k]));
        }
        out
    };
    let x0 = at(0.0);
    if x0.iter().sum::<f64>() <= aggregate {
        return x0;
    }
    let mut lo = 0.0;
    let mut hi = y.iter().copied().fold(0.0, f64::max).max(0.0) + 1.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if at(mid).iter().sum::<f64>() > aggregate {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-16 * hi.max(1.0) {
            break;
        }
    }
    at(hi)
}

/// Project `(a, u)` onto the halfspace `u + β·a ≥ h`.
pub fn project_halfspace(a: f64, u: f64, beta: f64, h: f64) -> (f64, f64) {
    let slack = h - u - beta * a;
    if slack <= 0.0 {
        return (a, u);
    }
    let t = slack / (1.0 + beta * beta);
    (a + t * beta, u + t)
}
