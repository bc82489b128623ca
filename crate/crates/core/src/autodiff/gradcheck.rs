//! Central finite differences, used as an independent oracle for the reverse
//! sweep.

use super::nn::ParamSet;
use super::tensor::Tensor;

/// Central-difference gradient of `f` with respect to every input element.
pub fn numeric_gradient(f: impl Fn(&[Tensor]) -> f64, inputs: &[Tensor], h: f64) -> Vec<Tensor> {
    let mut work: Vec<Tensor> = inputs.to_vec();
    let mut out = Vec::with_capacity(inputs.len());
    for i in 0..inputs.len() {
        let mut g = Tensor::zeros(inputs[i].shape());
        for j in 0..inputs[i].len() {
            let orig = work[i].data()[j];
            work[i].data_mut()[j] = orig + h;
            let fp = f(&work);
            work[i].data_mut()[j] = orig - h;
            let fm = f(&work);
            work[i].data_mut()[j] = orig;
            g.data_mut()[j] = (fp - fm) / (2.0 * h);
        }
        out.push(g);
    }
    out
}

/// Central-difference gradient of `f` with respect to every parameter.
pub fn numeric_param_gradient(params: &mut ParamSet, f: impl Fn(&ParamSet) -> f64, h: f64) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(params.len());
    for i in 0..params.len() {
        let id = super::ParamId(i);
        let n = params.get(id).value.len();
        let mut g = vec![0.0; n];
        for j in 0..n {
            let orig = params.get(id).value.data()[j];
            params.get_mut(id).value.data_mut()[j] = orig + h;
            let fp = f(params);
            params.get_mut(id).value.data_mut()[j] = orig - h;
            let fm = f(params);
            params.get_mut(id).value.data_mut()[j] = orig;
            g[j] = (fp - fm) / (2.0 * h);
        }
        out.push(g);
    }
    out
}

/// `max |a - n| / max(max |a|, max |n|)`, zero when both vectors vanish.
pub fn relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    assert_eq!(analytic.len(), numeric.len());
    let diff = analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n).abs())
        .fold(0.0, f64::max);
    let scale = analytic
        .iter()
        .chain(numeric)
        .map(|v| v.abs())
        .fold(0.0, f64::max);
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}
