//! Nelder-Mead simplex minimizer with dimension-adapted coefficients
//! (Gao & Han 2012).

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NelderMeadOptions {
    pub max_evals: usize,
    /// Stop once `max f − min f` over the simplex falls below this.
    pub f_tol: f64,
    /// Edge length of the initial axis-aligned simplex.
    pub initial_step: f64,
    /// Rebuild the simplex around the best point after convergence, up to
    /// this many times, while it keeps improving.
    pub restarts: usize,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            max_evals: 5000,
            f_tol: 1e-8,
            initial_step: 0.2,
            restarts: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NelderMeadResult<const D: usize> {
    pub x: [f64; D],
    pub fx: f64,
    pub evaluations: usize,
    /// Some round met the tolerance; a later restart may have been cut
    /// short by the budget without undoing that.
    pub converged: bool,
    /// Whether any point strictly better than the start was found.
    pub improved: bool,
}

/// Minimize `f` from `x0`. Non-finite values of `f` are treated as `+∞`.
pub fn minimize<const D: usize, F>(
    mut f: F,
    x0: [f64; D],
    opts: &NelderMeadOptions,
) -> NelderMeadResult<D>
where
    F: FnMut(&[f64; D]) -> f64,
{
    let n = D as f64;
    let (reflect, expand, contract, shrink) = (1.0, 1.0 + 2.0 / n, 0.75 - 0.5 / n, 1.0 - 1.0 / n);

    let mut evals = 0usize;
    let mut eval = |x: &[f64; D], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let f0 = eval(&x0, &mut evals);
    let mut best = (x0, f0);
    let mut ever_converged = false;
    let step = opts.initial_step;

    for _round in 0..=opts.restarts {
        let start_f = best.1;
        let mut simplex: Vec<([f64; D], f64)> = Vec::with_capacity(D + 1);
        simplex.push(best);
        for c in 0..D {
            let mut x = best.0;
            x[c] += step;
            let fx = eval(&x, &mut evals);
            simplex.push((x, fx));
        }
        let mut converged = false;
        while evals < opts.max_evals {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let spread = simplex[D].1 - simplex[0].1;
            if simplex[0].1.is_finite() && spread.abs() < opts.f_tol {
                converged = true;
                ever_converged = true;
                break;
            }
            let mut centroid = [0.0; D];
            for (x, _) in &simplex[..D] {
                for c in 0..D {
                    centroid[c] += x[c] / n;
                }
            }
            let along = |t: f64, from: &[f64; D]| {
                let mut y = [0.0; D];
                for c in 0..D {
                    y[c] = centroid[c] + t * (from[c] - centroid[c]);
                }
                y
            };
            let worst = simplex[D];
            let xr = along(-reflect, &worst.0);
            let fr = eval(&xr, &mut evals);
            if fr < simplex[0].1 {
                let xe = along(-reflect * expand, &worst.0);
                let fe = eval(&xe, &mut evals);
                simplex[D] = if fe < fr { (xe, fe) } else { (xr, fr) };
            } else if fr < simplex[D - 1].1 {
                simplex[D] = (xr, fr);
            } else {
                let (xc, fc) = if fr < worst.1 {
                    let xc = along(-contract, &worst.0);
                    (xc, eval(&xc, &mut evals))
                } else {
                    let xc = along(contract, &worst.0);
                    (xc, eval(&xc, &mut evals))
                };
                if fc < worst.1.min(fr) {
                    simplex[D] = (xc, fc);
                } else {
                    let x_best = simplex[0].0;
                    for vertex in simplex.iter_mut().skip(1) {
                        for (v, b) in vertex.0.iter_mut().zip(&x_best) {
                            *v = b + shrink * (*v - b);
                        }
                        vertex.1 = eval(&vertex.0, &mut evals);
                    }
                }
            }
        }
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        if simplex[0].1 < best.1 {
            best = simplex[0];
        }
        if !converged || best.1 >= start_f - opts.f_tol {
            break;
        }
    }

    NelderMeadResult {
        x: best.0,
        fx: best.1,
        evaluations: evals,
        converged: ever_converged,
        improved: best.1 < f0,
    }
}
