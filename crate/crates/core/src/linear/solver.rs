use super::Objective;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Target Euclidean norm of the gradient at the returned point.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-9,
            max_iterations: 500,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveReport {
    pub gradient_norm: f64,
    pub iterations: usize,
    pub objective: f64,
}

const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;

/// Damped Newton iteration from `w = 0`.
///
/// The regularizer makes the Hessian at least `λI`, so the Cholesky solve
/// always succeeds and the direction is a descent direction. Near the
/// optimum the objective decrease falls below rounding error; there a step is
/// accepted when it reduces the gradient norm instead.
pub(crate) fn minimize(
    obj: &Objective<'_>,
    options: &SolverOptions,
) -> Result<(Vec<f64>, SolveReport)> {
    let mut w = vec![0.0; obj.weight_len()];
    let mut value = obj.value(&w);
    let mut grad = obj.gradient(&w);
    let mut grad_norm = norm(&grad);

    for iteration in 0..options.max_iterations {
        if grad_norm <= options.tolerance {
            return Ok((
                w,
                SolveReport {
                    gradient_norm: grad_norm,
                    iterations: iteration,
                    objective: value,
                },
            ));
        }
        let hessian = obj.hessian(&w);
        let rhs = nalgebra::DVector::from_iterator(grad.len(), grad.iter().map(|g| -g));
        let step = hessian
            .cholesky()
            .ok_or(Error::NonConvergence {
                iterations: iteration,
                gradient_norm: grad_norm,
            })?
            .solve(&rhs);
        let slope: f64 = step.iter().zip(&grad).map(|(p, g)| p * g).sum();

        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_HALVINGS {
            let candidate: Vec<f64> = w
                .iter()
                .zip(step.iter())
                .map(|(wi, p)| wi + t * p)
                .collect();
            let cand_value = obj.value(&candidate);
            if cand_value <= value + ARMIJO * t * slope {
                accepted = Some((candidate, cand_value, None));
                break;
            }
            if (t * slope).abs() <= 1e-13 * (1.0 + value.abs()) {
                let cand_grad = obj.gradient(&candidate);
                if norm(&cand_grad) < grad_norm {
                    accepted = Some((candidate, cand_value, Some(cand_grad)));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((next, next_value, next_grad)) = accepted else {
            return Err(Error::NonConvergence {
                iterations: iteration,
                gradient_norm: grad_norm,
            });
        };
        w = next;
        value = next_value;
        grad = next_grad.unwrap_or_else(|| obj.gradient(&w));
        grad_norm = norm(&grad);
    }

    if grad_norm <= options.tolerance {
        return Ok((
            w,
            SolveReport {
                gradient_norm: grad_norm,
                iterations: options.max_iterations,
                objective: value,
            },
        ));
    }
    Err(Error::NonConvergence {
        iterations: options.max_iterations,
        gradient_norm: grad_norm,
    })
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
