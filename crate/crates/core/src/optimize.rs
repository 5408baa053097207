//! Derivative-free Nelder–Mead minimizer.

/// Settings for [`NelderMead::minimize`].
#[derive(Debug, Clone)]
pub struct NelderMead {
    /// Cap on simplex iterations, summed over restarts.
    pub max_iterations: usize,
    /// Converged once every vertex lies within this max-norm distance of the best one.
    pub diameter_tolerance: f64,
    /// Fresh simplices built around the best point after convergence.
    pub restarts: usize,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            max_iterations: 2000,
            diameter_tolerance: 1e-8,
            restarts: 2,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub point: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Best objective value after each iteration.
    pub trace: Vec<f64>,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

impl NelderMead {
    /// Minimizes `f` starting from `start`, with initial edge lengths `steps`.
    pub fn minimize<F>(&self, mut f: F, start: &[f64], steps: &[f64]) -> Minimum
    where
        F: FnMut(&[f64]) -> f64,
    {
        assert_eq!(start.len(), steps.len());
        let mut eval = |x: &[f64]| {
            let v = f(x);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        };

        let mut best = start.to_vec();
        let mut best_value = eval(&best);
        let mut iterations = 0;
        let mut trace = Vec::new();
        let mut converged = false;

        for _ in 0..=self.restarts {
            let before = best_value;
            let run = self.run(
                &mut eval,
                &best,
                steps,
                &mut iterations,
                &mut trace,
                best_value,
            );
            converged = run.2;
            if run.1 <= best_value {
                best = run.0;
                best_value = run.1;
            }
            if !converged || before - best_value <= f64::EPSILON * before.abs().max(1e-300) {
                break;
            }
        }

        Minimum {
            point: best,
            value: best_value,
            iterations,
            converged,
            trace,
        }
    }

    fn run<F>(
        &self,
        eval: &mut F,
        start: &[f64],
        steps: &[f64],
        iterations: &mut usize,
        trace: &mut Vec<f64>,
        start_value: f64,
    ) -> (Vec<f64>, f64, bool)
    where
        F: FnMut(&[f64]) -> f64,
    {
        let dim = start.len();
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(dim + 1);
        simplex.push((start.to_vec(), start_value));
        for i in 0..dim {
            let mut x = start.to_vec();
            x[i] += steps[i];
            let v = eval(&x);
            simplex.push((x, v));
        }

        loop {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            if diameter(&simplex) < self.diameter_tolerance {
                let (x, v) = simplex.swap_remove(0);
                return (x, v, true);
            }
            if *iterations >= self.max_iterations {
                let (x, v) = simplex.swap_remove(0);
                return (x, v, false);
            }
            *iterations += 1;

            let worst = simplex[dim].1;
            let second_worst = simplex[dim - 1].1;
            let best = simplex[0].1;

            let mut centroid = vec![0.0; dim];
            for (x, _) in &simplex[..dim] {
                for (c, xi) in centroid.iter_mut().zip(x) {
                    *c += xi / dim as f64;
                }
            }
            let along = |coef: f64| -> Vec<f64> {
                centroid
                    .iter()
                    .zip(&simplex[dim].0)
                    .map(|(c, w)| c + coef * (c - w))
                    .collect()
            };

            let reflected = along(REFLECT);
            let fr = eval(&reflected);
            if fr < best {
                let expanded = along(EXPAND);
                let fe = eval(&expanded);
                simplex[dim] = if fe < fr {
                    (expanded, fe)
                } else {
                    (reflected, fr)
                };
            } else if fr < second_worst {
                simplex[dim] = (reflected, fr);
            } else {
                let (contracted, fc) = if fr < worst {
                    let x = along(REFLECT * CONTRACT);
                    let v = eval(&x);
                    (x, v)
                } else {
                    let x = along(-CONTRACT);
                    let v = eval(&x);
                    (x, v)
                };
                if fc < worst.min(fr) {
                    simplex[dim] = (contracted, fc);
                } else {
                    let anchor = simplex[0].0.clone();
                    for (x, v) in simplex.iter_mut().skip(1) {
                        for (xi, a) in x.iter_mut().zip(&anchor) {
                            *xi = a + SHRINK * (*xi - a);
                        }
                        *v = eval(x);
                    }
                }
            }

            let current = simplex.iter().map(|s| s.1).fold(f64::INFINITY, f64::min);
            let prev = trace.last().copied().unwrap_or(start_value);
            trace.push(current.min(prev));
        }
    }
}

fn diameter(simplex: &[(Vec<f64>, f64)]) -> f64 {
    let anchor = &simplex[0].0;
    simplex[1..]
        .iter()
        .flat_map(|(x, _)| x.iter().zip(anchor).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max)
}
