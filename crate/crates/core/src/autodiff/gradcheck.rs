use crate::autodiff::tape::{Tape, Var};
use crate::autodiff::tensor::Tensor;
use crate::error::{Error, Result};

/// Outcome of comparing backward gradients with central differences.
#[derive(Clone, Debug)]
pub struct GradReport {
    /// Largest relative error per parameter tensor.
    pub per_param: Vec<f64>,
    pub max_rel_err: f64,
}

/// Relative error `|a − b| / max(|a|, |b|, floor)`.
pub fn rel_err(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

/// Checks the gradient of the scalar function built by `f` from parameter
/// leaves. `f` must be deterministic.
pub fn finite_diff_check<F>(f: F, params: &[Tensor], h: f64) -> Result<GradReport>
where
    F: Fn(&mut Tape, &[Var]) -> Result<Var>,
{
    if !(1e-8..=1e-4).contains(&h) {
        return Err(Error::InvalidParameter(format!("step {h} outside [1e-8, 1e-4]")));
    }
    let eval = |ps: &[Tensor]| -> Result<(f64, Vec<Tensor>)> {
        let mut tape = Tape::new();
        let vars: Vec<Var> = ps.iter().map(|p| tape.leaf(p.clone())).collect();
        let out = f(&mut tape, &vars)?;
        let g = tape.backward(out)?;
        Ok((tape.value(out).data()[0], vars.iter().map(|&v| g.wrt(v)).collect()))
    };
    let (_, analytic) = eval(params)?;
    let mut per_param = Vec::with_capacity(params.len());
    let mut work = params.to_vec();
    for (pi, p) in params.iter().enumerate() {
        let mut worst = 0.0f64;
        for j in 0..p.len() {
            let orig = p.data()[j];
            work[pi].data_mut()[j] = orig + h;
            let (fp, _) = eval(&work)?;
            work[pi].data_mut()[j] = orig - h;
            let (fm, _) = eval(&work)?;
            work[pi].data_mut()[j] = orig;
            let numeric = (fp - fm) / (2.0 * h);
            worst = worst.max(rel_err(analytic[pi].data()[j], numeric, 1e-6));
        }
        per_param.push(worst);
    }
    let max_rel_err = per_param.iter().copied().fold(0.0, f64::max);
    Ok(GradReport { per_param, max_rel_err })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_function_is_exact() {
        let w = Tensor::new(1, 3, vec![1.0, -2.0, 0.5]).unwrap();
        let r = finite_diff_check(
            |t, p| {
                let c = t.leaf(Tensor::new(1, 3, vec![3.0, 1.0, -4.0]).unwrap());
                let d = t.row_dot(p[0], c)?;
                Ok(t.sum(d))
            },
            &[w],
            1e-6,
        )
        .unwrap();
        assert!(r.max_rel_err < 1e-8);
    }

    #[test]
    fn step_bounds() {
        assert!(finite_diff_check(|t, p| Ok(t.sum(p[0])), &[Tensor::scalar(1.0)], 1e-2).is_err());
    }
}
