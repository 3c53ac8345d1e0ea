use super::tensor::Tensor2;
use super::Parameterized;

/// Central-difference step.
pub const FD_STEP: f64 = 1e-5;

/// Partials smaller than `REL_FLOOR · max(1, |loss|)` are compared on an
/// absolute scale: central differences carry rounding noise of order
/// `ε · |loss| / step` whatever the size of the partial.
const REL_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    /// (tensor index, entry index) of the worst partial.
    pub worst: (usize, usize),
    pub checked: usize,
}

fn rel_error(analytic: f64, numeric: f64, floor: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(floor)
}

/// Compares every analytic partial in `analytic` (shaped like the model's
/// parameters) with central differences of `loss`.
pub fn grad_check<M, F>(model: &mut M, analytic: &[Tensor2], mut loss: F) -> GradCheckReport
where
    M: Parameterized,
    F: FnMut(&M) -> f64,
{
    let shapes: Vec<usize> = model.params().iter().map(|p| p.data.len()).collect();
    let floor = REL_FLOOR * loss(model).abs().max(1.0);
    assert_eq!(shapes.len(), analytic.len(), "gradient tensor count");
    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        worst: (0, 0),
        checked: 0,
    };
    for (ti, &len) in shapes.iter().enumerate() {
        for k in 0..len {
            let orig = model.params()[ti].data[k];
            model.params_mut()[ti].data[k] = orig + FD_STEP;
            let up = loss(model);
            model.params_mut()[ti].data[k] = orig - FD_STEP;
            let down = loss(model);
            model.params_mut()[ti].data[k] = orig;
            let numeric = (up - down) / (2.0 * FD_STEP);
            let err = rel_error(analytic[ti].data[k], numeric, floor);
            report.checked += 1;
            if err > report.max_rel_error || err.is_nan() {
                report.max_rel_error = if err.is_nan() { f64::INFINITY } else { err };
                report.worst = (ti, k);
            }
        }
    }
    report
}

/// Same comparison for a function of a flat vector, e.g. an input Jacobian row.
pub fn grad_check_vec<F>(x: &[f64], analytic: &[f64], mut f: F) -> f64
where
    F: FnMut(&[f64]) -> f64,
{
    let mut probe = x.to_vec();
    let floor = REL_FLOOR * f(x).abs().max(1.0);
    let mut worst: f64 = 0.0;
    for k in 0..x.len() {
        probe[k] = x[k] + FD_STEP;
        let up = f(&probe);
        probe[k] = x[k] - FD_STEP;
        let down = f(&probe);
        probe[k] = x[k];
        let err = rel_error(analytic[k], (up - down) / (2.0 * FD_STEP), floor);
        worst = if err.is_nan() { f64::INFINITY } else { worst.max(err) };
    }
    worst
}
