//! Small numeric helpers shared across modules.

/// Fixed-order pairwise summation. The reduction tree depends only on the
/// slice length, so results are identical for any worker count upstream.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let mid = n / 2;
            pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
        }
    }
}

/// |x|^p with fast paths for the common orders.
#[inline]
pub fn abs_pow(x: f64, p: f64) -> f64 {
    let a = x.abs();
    if p == 2.0 {
        a * a
    } else if p == 1.0 {
        a
    } else {
        a.powf(p)
    }
}

/// d/dx |x|^p = p·|x|^{p-1}·sign(x), with the subgradient convention that
/// exact ties contribute zero.
#[inline]
pub fn abs_pow_deriv(x: f64, p: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let s = if x > 0.0 { 1.0 } else { -1.0 };
    if p == 2.0 {
        2.0 * x
    } else if p == 1.0 {
        s
    } else {
        p * x.abs().powf(p - 1.0) * s
    }
}

/// x^{1/p} for x ≥ 0 with fast paths.
#[inline]
pub fn pth_root(x: f64, p: f64) -> f64 {
    if p == 2.0 {
        x.sqrt()
    } else if p == 1.0 {
        x
    } else {
        x.powf(1.0 / p)
    }
}
