//! One-dimensional maximisers.

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Outcome of a one-dimensional maximisation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub argmax: f64,
    pub value: f64,
    pub iterations: usize,
}

/// Golden-section search for the maximum of a unimodal `f` on `[lo, hi]`.
///
/// Stops once the bracket is narrower than `tol`. The bracket endpoints are
/// also evaluated so that a maximum sitting on the boundary is not missed.
pub fn golden_section_max<F>(mut f: F, lo: f64, hi: f64, tol: f64) -> Maximum
where
    F: FnMut(f64) -> f64,
{
    debug_assert!(lo <= hi && tol > 0.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iterations = 0;

    while (b - a) > tol {
        iterations += 1;
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }

    let mid = 0.5 * (a + b);
    let mut best = Maximum {
        argmax: mid,
        value: f(mid),
        iterations,
    };
    for (x, v) in [(c, fc), (d, fd), (lo, f(lo)), (hi, f(hi))] {
        if v > best.value {
            best.argmax = x;
            best.value = v;
        }
    }
    best
}

/// Evenly spaced grid over `[lo, hi]` with the given step; `hi` is always
/// the last point.
pub fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    debug_assert!(step > 0.0 && hi >= lo);
    let count = ((hi - lo) / step + 1e-9).floor() as usize;
    let mut points: Vec<f64> = (0..=count).map(|i| lo + i as f64 * step).collect();
    if let Some(last) = points.last_mut() {
        if (hi - *last).abs() <= 1e-9 * step.max(1.0) {
            *last = hi;
        } else {
            points.push(hi);
        }
    }
    points
}

/// Index of the largest value; the first one wins on ties.
pub fn argmax_index(values: &[f64]) -> Option<usize> {
    values
        .iter()
        .enumerate()
        .fold(None, |best: Option<(usize, f64)>, (i, &v)| match best {
            Some((_, bv)) if bv >= v => best,
            _ => Some((i, v)),
        })
        .map(|(i, _)| i)
}

/// Grid scan over `[lo, hi]` followed by golden-section refinement inside the
/// two cells around the best grid point.
pub fn grid_then_golden<F>(mut f: F, lo: f64, hi: f64, step: f64, tol: f64) -> Maximum
where
    F: FnMut(f64) -> f64,
{
    let points = grid(lo, hi, step);
    let values: Vec<f64> = points.iter().map(|&x| f(x)).collect();
    let i = argmax_index(&values).expect("grid is never empty");
    let cell_lo = points[i.saturating_sub(1)];
    let cell_hi = points[(i + 1).min(points.len() - 1)];
    let refined = golden_section_max(&mut f, cell_lo, cell_hi, tol);
    if refined.value >= values[i] {
        Maximum {
            iterations: refined.iterations + points.len(),
            ..refined
        }
    } else {
        Maximum {
            argmax: points[i],
            value: values[i],
            iterations: refined.iterations + points.len(),
        }
    }
}
