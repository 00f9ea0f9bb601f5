//! Local maximization used to polish table parameters quoted to four digits.

const FD_STEP: f64 = 1e-5;
const MAX_ITER: usize = 100;
const STEP_TOL: f64 = 1e-12;

/// Newton iteration on the stationarity condition of `f`, with
/// central-difference derivatives. Falls back to a gradient step whenever the
/// Hessian is not negative definite.
pub(crate) fn maximize<const N: usize>(f: impl Fn(&[f64; N]) -> f64, start: [f64; N]) -> [f64; N] {
    let mut x = start;
    for _ in 0..MAX_ITER {
        let (g, h) = derivatives(&f, &x);
        let step = newton_step(&g, &h).unwrap_or_else(|| {
            let mut s = [0.0; N];
            for i in 0..N {
                s[i] = 1e-2 * g[i];
            }
            s
        });
        // Backtrack so the objective never decreases.
        let f0 = f(&x);
        let mut scale = 1.0;
        let mut next = x;
        loop {
            for i in 0..N {
                next[i] = x[i] + scale * step[i];
            }
            if f(&next) >= f0 || scale < 1e-6 {
                break;
            }
            scale *= 0.5;
        }
        let moved = (0..N).map(|i| (next[i] - x[i]).abs()).fold(0.0, f64::max);
        x = next;
        if moved < STEP_TOL {
            break;
        }
    }
    x
}

#[allow(clippy::needless_range_loop)]
fn derivatives<const N: usize>(f: &impl Fn(&[f64; N]) -> f64, x: &[f64; N]) -> ([f64; N], [[f64; N]; N]) {
    let h = FD_STEP;
    let at = |d: &[(usize, f64)]| {
        let mut p = *x;
        for &(i, v) in d {
            p[i] += v;
        }
        f(&p)
    };
    let f0 = f(x);
    let mut g = [0.0; N];
    let mut hess = [[0.0; N]; N];
    for i in 0..N {
        let fp = at(&[(i, h)]);
        let fm = at(&[(i, -h)]);
        g[i] = (fp - fm) / (2.0 * h);
        hess[i][i] = (fp - 2.0 * f0 + fm) / (h * h);
        for j in 0..i {
            let v = (at(&[(i, h), (j, h)]) - at(&[(i, h), (j, -h)]) - at(&[(i, -h), (j, h)])
                + at(&[(i, -h), (j, -h)]))
                / (4.0 * h * h);
            hess[i][j] = v;
            hess[j][i] = v;
        }
    }
    (g, hess)
}

/// Solves `H s = -g` for N in {1, 2}; `None` unless H is negative definite.
fn newton_step<const N: usize>(g: &[f64; N], h: &[[f64; N]; N]) -> Option<[f64; N]> {
    let mut s = [0.0; N];
    match N {
        1 => {
            if h[0][0] >= 0.0 {
                return None;
            }
            s[0] = -g[0] / h[0][0];
        }
        2 => {
            let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
            if h[0][0] >= 0.0 || det <= 0.0 {
                return None;
            }
            s[0] = -(h[1][1] * g[0] - h[0][1] * g[1]) / det;
            s[1] = -(-h[1][0] * g[0] + h[0][0] * g[1]) / det;
        }
        _ => return None,
    }
    Some(s)
}
