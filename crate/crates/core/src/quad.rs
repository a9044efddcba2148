//! Quadrature rules.

/// Trapezoidal rule on uniformly spaced samples.
pub fn trapezoid<T>(samples: &[T], spacing: f64) -> T
where
    T: Copy + core::ops::Add<Output = T> + core::ops::Mul<f64, Output = T> + Default,
{
    match samples.len() {
        0 | 1 => T::default(),
        n => {
            let mut acc = T::default();
            for s in &samples[1..n - 1] {
                acc = acc + *s;
            }
            acc = acc + (samples[0] + samples[n - 1]) * 0.5;
            acc * spacing
        }
    }
}

/// Adaptive Simpson integration of `f` over `[a, b]` to absolute tolerance `tol`.
///
/// Recursion depth is capped at 60; the last refinement is accepted if the
/// cap is hit.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 60)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || libm::fabs(delta) <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson over consecutive panels `[p0, p1], [p1, p2], ...`,
/// splitting the tolerance evenly.
pub fn adaptive_simpson_panels<F: Fn(f64) -> f64>(f: &F, breaks: &[f64], tol: f64) -> f64 {
    let panels = breaks.len().saturating_sub(1).max(1);
    breaks
        .windows(2)
        .map(|w| adaptive_simpson(f, w[0], w[1], tol / panels as f64))
        .sum()
}
