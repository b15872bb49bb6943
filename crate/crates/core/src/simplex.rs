//! Two-dimensional Nelder–Mead minimization.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexOptions {
    /// Stop once the objective values across the simplex differ by at most this.
    pub ftol: f64,
    /// ... and the simplex fits in a box of this size.
    pub xtol: f64,
    pub max_iter: usize,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        Self { ftol: 1e-5, xtol: 1e-6, max_iter: 400 }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SimplexResult {
    pub x: [f64; 2],
    pub value: f64,
    pub iterations: usize,
}

fn lerp(a: [f64; 2], b: [f64; 2], t: f64) -> [f64; 2] {
    [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
}

/// Minimizes `f` starting from the triangle `start`, `start + step[0] e₀`,
/// `start + step[1] e₁`. Non-finite objective values are treated as `+∞`.
pub fn minimize(f: impl Fn([f64; 2]) -> f64, start: [f64; 2], step: [f64; 2], opts: SimplexOptions) -> SimplexResult {
    let eval = |x: [f64; 2]| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut pts = [start, [start[0] + step[0], start[1]], [start[0], start[1] + step[1]]];
    let mut vals = pts.map(eval);
    let mut iterations = 0;

    while iterations < opts.max_iter {
        // Sort best to worst.
        let mut order = [0, 1, 2];
        order.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]));
        pts = order.map(|i| pts[i]);
        vals = order.map(|i| vals[i]);

        let fspread = vals[2] - vals[0];
        let xspread =
            pts[1..].iter().map(|p| (p[0] - pts[0][0]).abs().max((p[1] - pts[0][1]).abs())).fold(0.0, f64::max);
        if fspread.is_finite() && fspread <= opts.ftol && xspread <= opts.xtol {
            break;
        }
        iterations += 1;

        let centroid = lerp(pts[0], pts[1], 0.5);
        let reflected = lerp(pts[2], centroid, 2.0);
        let fr = eval(reflected);
        if fr < vals[0] {
            let expanded = lerp(pts[2], centroid, 3.0);
            let fe = eval(expanded);
            if fe < fr {
                pts[2] = expanded;
                vals[2] = fe;
            } else {
                pts[2] = reflected;
                vals[2] = fr;
            }
            continue;
        }
        if fr < vals[1] {
            pts[2] = reflected;
            vals[2] = fr;
            continue;
        }
        let (contracted, fc) = if fr < vals[2] {
            let x = lerp(centroid, reflected, 0.5);
            (x, eval(x))
        } else {
            let x = lerp(centroid, pts[2], 0.5);
            (x, eval(x))
        };
        if fc < vals[2].min(fr) {
            pts[2] = contracted;
            vals[2] = fc;
            continue;
        }
        // Shrink towards the best vertex.
        for i in 1..3 {
            pts[i] = lerp(pts[0], pts[i], 0.5);
            vals[i] = eval(pts[i]);
        }
    }

    let best = (0..3).min_by(|&i, &j| vals[i].total_cmp(&vals[j])).unwrap();
    SimplexResult { x: pts[best], value: vals[best], iterations }
}
