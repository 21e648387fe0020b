//! Nelder–Mead minimization in two dimensions.

/// Result of a simplex run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Minimum {
    pub point: [f64; 2],
    pub value: f64,
    pub evaluations: usize,
    /// Simplex diameter at termination.
    pub diameter: f64,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

fn diameter(s: &[([f64; 2], f64); 3]) -> f64 {
    let d = |a: [f64; 2], b: [f64; 2]| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
    d(s[0].0, s[1].0).max(d(s[0].0, s[2].0)).max(d(s[1].0, s[2].0))
}

fn along(from: [f64; 2], to: [f64; 2], t: f64) -> [f64; 2] {
    [from[0] + t * (to[0] - from[0]), from[1] + t * (to[1] - from[1])]
}

/// Minimizes `f` from the simplex `{start, start + step·e₀, start + step·e₁}`
/// until its diameter drops below `tol` or `max_evals` evaluations are spent.
pub fn minimize(
    mut f: impl FnMut([f64; 2]) -> f64,
    start: [f64; 2],
    step: [f64; 2],
    tol: f64,
    max_evals: usize,
) -> Minimum {
    let evals = std::cell::Cell::new(0usize);
    let mut eval = |x: [f64; 2]| {
        evals.set(evals.get() + 1);
        f(x)
    };
    let vertices = [start, [start[0] + step[0], start[1]], [start[0], start[1] + step[1]]];
    let mut s = vertices.map(|x| (x, eval(x)));

    loop {
        s.sort_by(|a, b| a.1.total_cmp(&b.1));
        let size = diameter(&s);
        if size < tol || evals.get() >= max_evals {
            return Minimum {
                point: s[0].0,
                value: s[0].1,
                evaluations: evals.get(),
                diameter: size,
            };
        }
        let (best, second, worst) = (s[0], s[1], s[2]);
        let centroid = along(best.0, second.0, 0.5);

        let reflected = along(centroid, worst.0, -REFLECT);
        let fr = eval(reflected);
        if fr < best.1 {
            let expanded = along(centroid, worst.0, -EXPAND);
            let fe = eval(expanded);
            s[2] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
            continue;
        }
        if fr < second.1 {
            s[2] = (reflected, fr);
            continue;
        }
        // Contract towards the better of the worst vertex and its reflection.
        let (target, f_target) = if fr < worst.1 { (reflected, fr) } else { (worst.0, worst.1) };
        let contracted = along(centroid, target, CONTRACT);
        let fc = eval(contracted);
        if fc < f_target {
            s[2] = (contracted, fc);
            continue;
        }
        for v in &mut s[1..] {
            let x = along(best.0, v.0, SHRINK);
            *v = (x, eval(x));
        }
    }
}
