//! Derivative-free local maximization in two variables.

/// Nelder–Mead maximization of `f` from `start` with initial step `step`.
/// Stops when the spread of simplex values drops below `ftol` or after
/// `max_iter` iterations. Returns the best point and its value.
pub(crate) fn nelder_mead_max<F>(f: F, start: [f64; 2], step: f64, ftol: f64, max_iter: usize) -> ([f64; 2], f64)
where
    F: Fn([f64; 2]) -> f64,
{
    // Internally minimize g = -f.
    let g = |p: [f64; 2]| -f(p);
    let mut simplex = [
        start,
        [start[0] + step, start[1]],
        [start[0], start[1] + step],
    ];
    let mut values = simplex.map(g);

    for _ in 0..max_iter {
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.map(|k| simplex[k]);
        values = order.map(|k| values[k]);

        if (values[2] - values[0]).abs() <= ftol {
            let diam = dist(simplex[0], simplex[2]).max(dist(simplex[0], simplex[1]));
            if diam < 1e-7 || (values[2] - values[0]).abs() <= ftol * 1e-3 {
                break;
            }
        }

        let centroid = [
            0.5 * (simplex[0][0] + simplex[1][0]),
            0.5 * (simplex[0][1] + simplex[1][1]),
        ];
        let along = |t: f64| {
            [
                centroid[0] + t * (simplex[2][0] - centroid[0]),
                centroid[1] + t * (simplex[2][1] - centroid[1]),
            ]
        };

        let reflected = along(-1.0);
        let fr = g(reflected);
        if fr < values[0] {
            let expanded = along(-2.0);
            let fe = g(expanded);
            if fe < fr {
                simplex[2] = expanded;
                values[2] = fe;
            } else {
                simplex[2] = reflected;
                values[2] = fr;
            }
            continue;
        }
        if fr < values[1] {
            simplex[2] = reflected;
            values[2] = fr;
            continue;
        }
        let (contracted, fc) = if fr < values[2] {
            let p = along(-0.5);
            (p, g(p))
        } else {
            let p = along(0.5);
            (p, g(p))
        };
        if fc < values[2].min(fr) {
            simplex[2] = contracted;
            values[2] = fc;
            continue;
        }
        // Shrink toward the best vertex.
        for k in 1..3 {
            simplex[k] = [
                simplex[0][0] + 0.5 * (simplex[k][0] - simplex[0][0]),
                simplex[0][1] + 0.5 * (simplex[k][1] - simplex[0][1]),
            ];
            values[k] = g(simplex[k]);
        }
    }

    let best = (0..3).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap();
    (simplex[best], -values[best])
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_quadratic_peak() {
        let (p, v) = nelder_mead_max(|x| 3.0 - (x[0] - 1.0).powi(2) - 2.0 * (x[1] + 0.5).powi(2), [0.0, 0.0], 0.3, 1e-14, 2000);
        assert!((p[0] - 1.0).abs() < 1e-5 && (p[1] + 0.5).abs() < 1e-5);
        assert!((v - 3.0).abs() < 1e-10);
    }

    #[test]
    fn rosenbrock_valley() {
        let f = |x: [f64; 2]| -((1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2));
        let (p, _) = nelder_mead_max(f, [-1.2, 1.0], 0.5, 1e-16, 5000);
        assert!((p[0] - 1.0).abs() < 1e-4 && (p[1] - 1.0).abs() < 1e-4);
    }
}
